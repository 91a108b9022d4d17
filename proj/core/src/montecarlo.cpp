#include "stlopt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"

namespace stlopt {

namespace fs = std::filesystem;

const char* to_string(Performance p) { return p == Performance::high ? "HP" : "LP"; }

Performance classify(double stl_star, double stl_ml) {
  if (!std::isfinite(stl_star) || !std::isfinite(stl_ml)) throw DomainError("classification needs finite STL values");
  return stl_star >= kHighPerformanceRatio * stl_ml ? Performance::high : Performance::low;
}

const char* to_string(Region r) {
  switch (r) {
    case Region::low: return "low";
    case Region::transition: return "transition";
    case Region::high: return "high";
  }
  return "?";
}

Region region_for(double p_hp_percent) {
  if (p_hp_percent <= 20.0) return Region::low;
  if (p_hp_percent >= 80.0) return Region::high;
  return Region::transition;
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["strategy"] = r.strategy;
  j["band_index"] = r.band_index;
  j["band"] = {{"f_minus", r.band.f_minus}, {"f_plus", r.band.f_plus}, {"n_samples", r.band.n_samples}};
  j["seed"] = r.seed;
  j["run_index"] = r.run_index;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["termination"] = r.termination;
  j["design"] = r.design_path;
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["stl_star"] = r.stl_star;
    j["stl_ml"] = r.stl_ml;
    j["classification"] = to_string(r.classification);
  }
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.strategy = j.at("strategy").get<std::string>();
    r.band_index = j.at("band_index").get<int>();
    const auto& b = j.at("band");
    r.band.f_minus = b.at("f_minus").get<double>();
    r.band.f_plus = b.at("f_plus").get<double>();
    r.band.n_samples = b.at("n_samples").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.run_index = j.at("run_index").get<int>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.termination = j.at("termination").get<std::string>();
    r.design_path = j.at("design").get<std::string>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    r.stl_star = j.at("stl_star").get<double>();
    r.stl_ml = j.at("stl_ml").get<double>();
    const std::string c = j.at("classification").get<std::string>();
    if (c != "HP" && c != "LP") throw ConfigError("unknown classification '" + c + "'");
    r.classification = c == "HP" ? Performance::high : Performance::low;
    if (r.classification != classify(r.stl_star, r.stl_ml)) {
      throw ConfigError("stored classification disagrees with the STL values");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
}

std::pair<double, double> EnsembleStats::confidence_interval(double z) const {
  return {std::max(0.0, p_hp - z * standard_error), std::min(100.0, p_hp + z * standard_error)};
}

EnsembleStats estimate_p_hp(int n_hp, int n_lp) {
  if (n_hp < 0 || n_lp < 0) throw InvalidParameter("negative ensemble counts");
  const int n = n_hp + n_lp;
  if (n == 0) throw DomainError("empty ensemble");
  EnsembleStats s;
  s.n_hp = n_hp;
  s.n_lp = n_lp;
  const double p = static_cast<double>(n_hp) / n;
  s.p_hp = 100.0 * n_hp / n;
  s.standard_error = 100.0 * std::sqrt(p * (1.0 - p) / n);
  s.region = region_for(s.p_hp);
  return s;
}

HpCriteria aggregate_criteria(const std::vector<RunRecord>& records) {
  double stl = 0.0, iters = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.failed() || r.classification != Performance::high) continue;
    stl += r.stl_star;
    iters += r.iterations;
    ++n;
  }
  HpCriteria c;
  if (n > 0) {
    c.stl_hp = stl / n;
    c.n_iter_hp = iters / n;
  }
  return c;
}

EnsembleStats estimate_p_hp(const std::vector<RunRecord>& records) {
  int hp = 0, lp = 0;
  for (const auto& r : records) {
    if (r.failed()) continue;
    (r.classification == Performance::high ? hp : lp)++;
  }
  EnsembleStats s = estimate_p_hp(hp, lp);
  const HpCriteria c = aggregate_criteria(records);
  s.stl_hp_mean = c.stl_hp;
  s.n_iter_hp_mean = c.n_iter_hp;
  return s;
}

ProblemFactory fem_problem_factory(const CampaignSpec& spec) {
  const FilterSpec filter = spec.filter_r1 > 0.0 && spec.filter_r2 > 0.0
                                ? FilterSpec::for_grid(spec.grid, spec.filter_r1, spec.filter_r2)
                                : FilterSpec::for_grid(spec.grid);
  return [grid = spec.grid, cat = spec.materials, filter, v = spec.volume_fraction](const FrequencyBand& band) {
    return std::make_unique<FemDesignProblem>(grid, cat, filter, band, v);
  };
}

std::string record_file_name(StrategyKind strategy, int band_index, int run_index) {
  std::ostringstream os;
  os << to_string(strategy) << "_band" << band_index << "_run" << run_index << ".json";
  return os.str();
}

std::vector<RunRecord> load_records(const fs::path& dir) {
  std::vector<RunRecord> out;
  const fs::path rec = dir / "records";
  if (!fs::exists(rec)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(rec)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(run_record_from_json(nlohmann::json::parse(read_file(f))));
  return out;
}

std::vector<CampaignCell> tabulate(const std::vector<RunRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<RunRecord>> groups;
  for (const auto& r : records) groups[{r.band_index, r.strategy}].push_back(r);
  std::vector<CampaignCell> cells;
  for (const auto& [key, recs] : groups) {
    const bool any = std::any_of(recs.begin(), recs.end(), [](const RunRecord& r) { return !r.failed(); });
    if (!any) continue;
    CampaignCell c;
    c.band_index = key.first;
    c.band = recs.front().band;
    c.strategy = key.second;
    c.stats = estimate_p_hp(recs);
    cells.push_back(c);
  }
  return cells;
}

namespace {

std::string band_label(const FrequencyBand& b) {
  std::ostringstream os;
  os << b.f_minus << '-' << b.f_plus;
  return os.str();
}

void put_optional(std::ostream& os, const std::optional<double>& v) {
  if (v) os << *v;
}

}  // namespace

std::string format_stats_csv(const std::vector<CampaignCell>& cells) {
  std::ostringstream os;
  os << "band,strategy,n_hp,n_lp,p_hp,se,stl_hp,n_iter_hp,region\n" << std::setprecision(17);
  for (const auto& c : cells) {
    os << band_label(c.band) << ',' << c.strategy << ',' << c.stats.n_hp << ',' << c.stats.n_lp << ',' << c.stats.p_hp
       << ',' << c.stats.standard_error << ',';
    put_optional(os, c.stats.stl_hp_mean);
    os << ',';
    put_optional(os, c.stats.n_iter_hp_mean);
    os << ',' << to_string(c.stats.region) << '\n';
  }
  return os.str();
}

std::string format_scatter_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "f_minus,f_plus,strategy,seed,run,stl_star,stl_ml,ratio,class\n" << std::setprecision(12);
  for (const auto& r : records) {
    if (r.failed()) continue;
    os << r.band.f_minus << ',' << r.band.f_plus << ',' << r.strategy << ',' << r.seed << ',' << r.run_index << ','
       << r.stl_star << ',' << r.stl_ml << ',' << r.stl_star / r.stl_ml << ',' << to_string(r.classification) << '\n';
  }
  return os.str();
}

namespace {

struct Job {
  int band_index;
  StrategyKind strategy;
  int run_index;
};

RunRecord execute(const CampaignSpec& spec, const Job& job, const ProblemFactory& factory, const fs::path& dir) {
  RunRecord r;
  r.strategy = to_string(job.strategy);
  r.band_index = job.band_index;
  r.band = spec.bands[job.band_index];
  r.seed = spec.seed;
  r.run_index = job.run_index;
  try {
    std::unique_ptr<DesignProblem> problem = factory(r.band);
    const DesignVector x0 = random_initial_guess(
        {spec.seed, static_cast<std::uint32_t>(job.band_index), static_cast<std::uint32_t>(job.run_index)}, spec.grid);
    if (problem->num_variables() != x0.values.size()) throw DimensionError("problem size does not match the grid");
    OptimizationSettings settings = spec.settings;
    settings.strategy = StrategyVariant::make(job.strategy);
    const OptimizationResult res = run_optimization(*problem, x0.values, settings);
    r.iterations = res.iterations;
    r.converged = res.converged;
    r.termination = res.termination;
    r.stl_star = res.stl_star;
    r.stl_ml = problem->mass_law_reference(0.0);
    r.classification = classify(r.stl_star, r.stl_ml);
    const std::string stem = fs::path(record_file_name(job.strategy, job.band_index, job.run_index)).stem().string();
    if (spec.write_designs) {
      r.design_path = "designs/" + stem + "_xi.txt";
      write_design(dir / r.design_path, res.xi, spec.grid);
      if (const auto* fem = dynamic_cast<const FemDesignProblem*>(problem.get())) {
        write_design(dir / "designs" / (stem + "_b.txt"), fem->physical_designs(res.xi, res.final_stage).b,
                     spec.grid);
      }
    }
    if (spec.write_histories) {
      atomic_write(dir / "histories" / (stem + ".csv"), format_history_csv(res.history));
      atomic_write(dir / "histories" / (stem + "_stages.csv"), format_transitions_csv(res.transitions));
    }
  } catch (const std::exception& e) {
    r.error = e.what();
    if (r.termination.empty()) r.termination = "error";
  }
  return r;
}

}  // namespace

CampaignResult run_campaign(const CampaignSpec& spec, const fs::path& dir, const ProblemFactory& factory_in,
                            const std::function<void(const RunRecord&)>& on_record) {
  if (spec.bands.empty()) throw InvalidParameter("campaign has no frequency bands");
  if (spec.strategies.empty()) throw InvalidParameter("campaign has no strategies");
  if (spec.runs_per_cell < 1) throw InvalidParameter("runs per cell must be positive");
  if (spec.workers < 1) throw InvalidParameter("worker count must be positive");
  for (const auto& b : spec.bands) b.validate();
  spec.grid.validate();
  const ProblemFactory factory = factory_in ? factory_in : fem_problem_factory(spec);

  fs::create_directories(dir / "records");
  CampaignResult result;
  std::vector<Job> jobs;
  for (int b = 0; b < static_cast<int>(spec.bands.size()); ++b) {
    for (StrategyKind s : spec.strategies) {
      for (int k = 0; k < spec.runs_per_cell; ++k) {
        if (fs::exists(dir / "records" / record_file_name(s, b, k))) {
          ++result.skipped;
        } else {
          jobs.push_back({b, s, k});
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr fatal;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const RunRecord r = execute(spec, jobs[i], factory, dir);
      try {
        atomic_write(dir / "records" / record_file_name(jobs[i].strategy, jobs[i].band_index, jobs[i].run_index),
                     to_json(r).dump(2) + "\n");
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!fatal) fatal = std::current_exception();
        next = jobs.size();
        return;
      }
      std::lock_guard<std::mutex> lock(mu);
      ++result.executed;
      if (on_record) on_record(r);
    }
  };
  const int n_threads = std::min<int>(spec.workers, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  result.records = load_records(dir);
  result.cells = tabulate(result.records);
  atomic_write(dir / "stats.csv", format_stats_csv(result.cells));
  atomic_write(dir / "scatter.csv", format_scatter_csv(result.records));
  return result;
}

}  // namespace stlopt
