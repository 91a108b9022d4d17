#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stlopt/errors.hpp"
#include "stlopt_cli/commands.hpp"

using namespace stlopt::cli;

namespace {

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config,-c", o.config, "JSON run configuration");
  sub->add_option("--out,-o", o.out, "output directory (overrides the config)");
  sub->add_option("--workers,-j", o.workers, "parallel runs (default: STLOPT_WORKERS or the config)");
  sub->add_option("--seed", o.seed, "campaign seed (overrides the config)");
  sub->add_flag("--resume", o.resume, "keep finished runs and continue");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology optimization of periodic sandwich panel cores for sound transmission loss"};
  app.require_subcommand(1);
  CommonOptions common;
  AnalyzeOptions analyze;
  OracleOptions oracle;
  GradientOptions grad;

  auto* optimize = app.add_subcommand("optimize", "single seeded optimization run");
  add_common(optimize, common);
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo campaign over bands, strategies and seeds");
  add_common(sweep, common);

  auto* an = app.add_subcommand("analyze", "STL spectrum of a density snapshot");
  add_common(an, common);
  an->add_option("--design,-d", analyze.design, "density snapshot file")->required();
  an->add_option("--freqs", analyze.frequencies, "explicit frequency list [Hz]")->delimiter(',');
  an->add_option("--fmin", analyze.f_min, "lowest frequency [Hz]");
  an->add_option("--fmax", analyze.f_max, "highest frequency [Hz]");
  an->add_option("--points", analyze.points, "number of equally spaced frequencies");
  an->add_option("--theta", analyze.theta_deg, "incidence angle [deg]");

  auto* orc = app.add_subcommand("oracle", "analytic mass-law or mass-spring-mass curves");
  add_common(orc, common);
  orc->add_option("--kind,-k", oracle.kind, "masslaw | msm")->check(CLI::IsMember({"masslaw", "msm"}));
  orc->add_option("--fmin", oracle.f_min, "lowest frequency [Hz]");
  orc->add_option("--fmax", oracle.f_max, "highest frequency [Hz]");
  orc->add_option("--points", oracle.points, "number of log-spaced frequencies");
  orc->add_option("--surface-density", oracle.surface_density, "plate surface density [kg/m^2]");
  orc->add_option("--m1", oracle.m1, "first plate surface density [kg/m^2]");
  orc->add_option("--m2", oracle.m2, "second plate surface density [kg/m^2]");
  orc->add_option("--fd", oracle.f_d, "decoupling frequency [Hz]");

  auto* vg = app.add_subcommand("verify-gradients", "adjoint versus central finite differences");
  add_common(vg, common);
  vg->add_option("--probes", grad.probes, "components checked per functional");
  vg->add_option("--step", grad.step, "finite difference step");
  vg->add_option("--tolerance", grad.tolerance, "largest accepted relative error");
  vg->add_option("--beta", grad.beta1, "projection steepness of the first stage");

  auto* report = app.add_subcommand("report", "regenerate plots and tables from CSV outputs");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*optimize) return cmd_optimize(common, std::cout);
    if (*sweep) return cmd_sweep(common, std::cout);
    if (*an) return cmd_analyze(common, analyze, std::cout);
    if (*orc) return cmd_oracle(common, oracle, std::cout);
    if (*vg) return cmd_verify_gradients(common, grad, std::cout);
    if (*report) return cmd_report(common, std::cout);
  } catch (const stlopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
