#include "stlopt_cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"
#include "stlopt_cli/plots.hpp"

namespace stlopt::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig c = opts.config.empty() ? RunConfig{} : load_config(opts.config);
  if (!opts.out.empty()) c.output = opts.out;
  if (opts.seed) c.seed = *opts.seed;
  c.workers = resolve_workers(opts, c.workers);
  c.validate();
  return c;
}

int resolve_workers(const CommonOptions& opts, int configured) {
  if (opts.workers) {
    if (*opts.workers < 1) throw ConfigError("--workers must be positive");
    return *opts.workers;
  }
  if (const char* env = std::getenv("STLOPT_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("STLOPT_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return configured;
}

namespace {

std::string history_row(const IterationRecord& r) {
  const std::string s = format_history_csv({r});
  return s.substr(s.find('\n') + 1);
}

std::string spectra_csv(const FemDesignProblem& problem, const Field& xi, const StageState& stage) {
  const PhysicalDesignSet set = problem.physical_designs(xi, stage);
  const std::vector<double> f = problem.band().samples();
  std::vector<SpectrumResult> out;
  for (DesignTag tag : {DesignTag::blueprint, DesignTag::eroded, DesignTag::dilated}) {
    SpectrumResult s = analyze_spectrum(field_for(set, tag), problem.grid(), problem.catalog(), f);
    s.tag = tag;
    out.push_back(s);
  }
  return format_spectrum_csv(out);
}

}  // namespace

int cmd_optimize(const CommonOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = cfg.output;
  if (opts.resume && fs::exists(dir / "record.json")) {
    log << "run in " << dir.string() << " already finished\n";
    return kOk;
  }
  fs::create_directories(dir);
  atomic_write(dir / "config.json", emit_config(cfg).dump(2) + "\n");

  const FrequencyBand band = cfg.bands.front();
  const StrategyKind kind = cfg.strategies.front();
  FemDesignProblem problem(cfg.grid, cfg.materials, cfg.filter(), band, cfg.volume_fraction);
  const DesignVector x0 = random_initial_guess({cfg.seed, 0, 0}, cfg.grid);

  std::ofstream history(dir / "history.csv", std::ios::trunc);
  if (!history) throw Error("cannot write " + (dir / "history.csv").string());
  history << format_history_csv({});
  int last_stage = -1;
  const OptimizationResult res = run_optimization(problem, x0.values, cfg.settings(kind), [&](const IterationRecord& r) {
    history << history_row(r) << std::flush;
    if (r.stage != last_stage) {
      log << "iter " << r.iteration << " stage " << r.stage << " beta1 " << r.beta1 << " STL* " << r.stl_star
          << " dB\n";
      last_stage = r.stage;
    }
  });
  history.close();

  atomic_write(dir / "stages.csv", format_transitions_csv(res.transitions));
  write_design(dir / "design_xi.txt", res.xi, cfg.grid);
  write_design(dir / "design_b.txt", problem.physical_designs(res.xi, res.final_stage).b, cfg.grid);
  atomic_write(dir / "spectrum.csv", spectra_csv(problem, res.xi, res.final_stage));

  RunRecord rec;
  rec.strategy = to_string(kind);
  rec.band = band;
  rec.seed = cfg.seed;
  rec.iterations = res.iterations;
  rec.converged = res.converged;
  rec.termination = res.termination;
  rec.stl_star = res.stl_star;
  rec.stl_ml = problem.mass_law_reference(0.0);
  rec.classification = classify(rec.stl_star, rec.stl_ml);
  rec.design_path = "design_xi.txt";
  regenerate_plots(dir);
  atomic_write(dir / "record.json", to_json(rec).dump(2) + "\n");

  log << std::fixed << std::setprecision(3) << "STL* " << rec.stl_star << " dB, mass law " << rec.stl_ml
      << " dB -> " << to_string(rec.classification) << " after " << rec.iterations << " iterations ("
      << rec.termination << ")\n";
  return res.termination == "budget" ? kBudgetExceeded : kOk;
}

int cmd_sweep(const CommonOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = cfg.output;
  if (!opts.resume && fs::exists(dir / "records") && !fs::is_empty(dir / "records")) {
    log << dir.string() << " already holds run records; pass --resume to continue the campaign\n";
    return kFailure;
  }
  fs::create_directories(dir);
  atomic_write(dir / "config.json", emit_config(cfg).dump(2) + "\n");
  const CampaignSpec spec = cfg.campaign();
  const std::size_t total = spec.bands.size() * spec.strategies.size() * spec.runs_per_cell;
  const CampaignResult res = run_campaign(spec, dir, {}, [&](const RunRecord& r) {
    log << r.strategy << " band " << r.band.f_minus << '-' << r.band.f_plus << " run " << r.run_index << ": ";
    if (r.failed()) {
      log << "failed: " << *r.error << '\n';
    } else {
      log << std::fixed << std::setprecision(2) << r.stl_star << " dB vs " << r.stl_ml << " dB "
          << to_string(r.classification) << '\n';
      log.unsetf(std::ios::floatfield);
    }
  });
  regenerate_plots(dir);
  log << res.executed << " runs executed, " << res.skipped << " reused, " << total << " in the campaign\n";
  log << format_stats_csv(res.cells);
  return kOk;
}

namespace {

std::vector<double> frequency_grid(double f_min, double f_max, int points, bool log_spacing) {
  if (!(f_min > 0.0 && f_max > f_min) || points < 2) throw ConfigError("invalid frequency range");
  std::vector<double> f(points);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    f[i] = log_spacing ? f_min * std::pow(f_max / f_min, t) : f_min + t * (f_max - f_min);
  }
  return f;
}

double design_surface_density(const Field& density, const GridSpec& grid, const MaterialCatalog& cat) {
  double m = 0.0;
  for (Eigen::Index e = 0; e < density.size(); ++e) m += cat.rho_v + density[e] * (cat.rho_s - cat.rho_v);
  return m * grid.element_size * grid.element_size / grid.lx();
}

}  // namespace

int cmd_analyze(const CommonOptions& opts, const AnalyzeOptions& a, std::ostream& log) {
  if (a.design.empty()) throw ConfigError("analyze needs --design");
  const RunConfig cfg = resolve_config(opts);
  const DesignVector design = read_design(a.design);
  const std::vector<double> freqs =
      a.frequencies.empty() ? frequency_grid(a.f_min, a.f_max, a.points, false) : a.frequencies;
  const double theta = a.theta_deg * std::numbers::pi / 180.0;
  SpectrumResult s = analyze_spectrum(design.values, design.grid, cfg.materials, freqs, theta);
  const fs::path dir = cfg.output;
  atomic_write(dir / "spectrum.csv", format_spectrum_csv({s}));

  const double m = design_surface_density(design.values, design.grid, cfg.materials);
  std::ostringstream ref;
  ref << "frequency_hz,stl_db,curve\n" << std::setprecision(12);
  for (double f : freqs) {
    ref << f << ',' << mass_law(m, f, theta, cfg.materials.rho_a, cfg.materials.c_halfspace) << ",mass law\n";
  }
  atomic_write(dir / "reference.csv", ref.str());
  regenerate_plots(dir);
  log << std::setprecision(6) << "surface density " << m << " kg/m^2, mean STL " << s.band_average << " dB over "
      << freqs.size() << " frequencies\n";
  return kOk;
}

int cmd_oracle(const CommonOptions& opts, const OracleOptions& o, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const MaterialCatalog& cat = cfg.materials;
  const std::vector<double> freqs = frequency_grid(o.f_min, o.f_max, o.points, true);
  std::ostringstream csv;
  csv << "frequency_hz,stl_db,curve\n" << std::setprecision(12);
  if (o.kind == "masslaw") {
    const double m = o.surface_density ? *o.surface_density
                                       : equal_mass_surface_density(cfg.grid, cat, cfg.volume_fraction);
    if (!(m > 0.0)) throw ConfigError("surface density must be positive");
    for (double f : freqs) csv << f << ',' << mass_law(m, f, 0.0, cat.rho_a, cat.c_halfspace) << ",mass law\n";
    log << "mass law for " << m << " kg/m^2\n";
  } else if (o.kind == "msm") {
    const double plate = cat.rho_s * cfg.grid.fixed_rows * cfg.grid.element_size;
    const double m1 = o.m1.value_or(plate), m2 = o.m2.value_or(plate);
    if (!(m1 > 0.0 && m2 > 0.0)) throw ConfigError("plate masses must be positive");
    if (!(o.f_d > 0.0)) throw ConfigError("decoupling frequency must be positive");
    const double k = spring_for_decoupling(m1, m2, o.f_d);
    for (double f : freqs) {
      csv << f << ',' << mass_spring_mass_stl(m1, m2, k, f, cat.rho_a, cat.c_halfspace) << ",mass-spring-mass\n";
    }
    for (double f : freqs) csv << f << ',' << mass_law(m1 + m2, f, 0.0, cat.rho_a, cat.c_halfspace) << ",mass law\n";
    log << "plates " << m1 << " + " << m2 << " kg/m^2, spring " << k << " N/m^3, f_d " << o.f_d << " Hz\n";
  } else {
    throw ConfigError("unknown oracle kind '" + o.kind + "' (masslaw | msm)");
  }
  const fs::path dir = cfg.output;
  atomic_write(dir / "oracle.csv", csv.str());
  regenerate_plots(dir);
  return kOk;
}

int cmd_verify_gradients(const CommonOptions& opts, const GradientOptions& g, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  FemDesignProblem problem(cfg.grid, cfg.materials, cfg.filter(), cfg.bands.front(), cfg.volume_fraction);
  StageState stage = ContinuationController(StrategyVariant::make(cfg.strategies.front())).initial_stage();
  stage.beta1 = g.beta1;
  stage.beta2 = g.beta1 / 2.0;
  if (!stage.j_min) stage.j_min = -0.5;
  const Field xi = random_initial_guess({cfg.seed, 0, 0}, cfg.grid).values;
  const ProblemEvaluation ev = problem.evaluate(xi, stage, true);

  struct Check {
    const char* name;
    Field gradient;
    std::function<double(const ProblemEvaluation&)> pick;
  };
  const std::vector<Check> checks = {
      {"J_b", ev.dstl.front(), [](const ProblemEvaluation& e) { return e.stl.front(); }},
      {"J_vol", ev.dJ_vol, [](const ProblemEvaluation& e) { return e.J_vol; }},
      {"J_conn", ev.dJ_conn, [](const ProblemEvaluation& e) { return e.J_conn; }},
  };
  std::ostringstream csv;
  csv << "functional,component,adjoint,finite_difference\n" << std::setprecision(12);
  bool ok = true;
  for (const auto& c : checks) {
    const FdReport rep = fd_check([&](const Field& x) { return c.pick(problem.evaluate(x, stage, false)); }, xi,
                                  c.gradient, g.probes, g.step, cfg.seed, &cfg.grid);
    for (std::size_t i = 0; i < rep.probes.size(); ++i) {
      csv << c.name << ',' << rep.probes[i] << ',' << rep.adjoint[i] << ',' << rep.finite_difference[i] << '\n';
    }
    const bool pass = rep.max_rel_error < g.tolerance;
    ok = ok && pass;
    log << std::setw(7) << c.name << "  max rel error " << std::scientific << std::setprecision(2) << rep.max_rel_error
        << std::defaultfloat << (pass ? "  ok" : "  FAIL") << '\n';
  }
  atomic_write(fs::path(cfg.output) / "gradients.csv", csv.str());
  return ok ? kOk : kFailure;
}

int cmd_report(const CommonOptions& opts, std::ostream& log) {
  const fs::path dir = opts.out.empty() ? fs::path(resolve_config(opts).output) : fs::path(opts.out);
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  const auto written = regenerate_plots(dir);
  for (const auto& p : written) log << "wrote " << p.string() << '\n';
  if (fs::exists(dir / "records")) {
    const auto records = load_records(dir);
    const auto cells = tabulate(records);
    atomic_write(dir / "stats.csv", format_stats_csv(cells));
    atomic_write(dir / "scatter.csv", format_scatter_csv(records));
    regenerate_plots(dir);
    log << format_stats_csv(cells);
  }
  if (written.empty() && !fs::exists(dir / "records")) log << "nothing to report in " << dir.string() << '\n';
  return kOk;
}

}  // namespace stlopt::cli
