#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stlopt_cli/config.hpp"

namespace stlopt::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kBudgetExceeded = 3 };

struct CommonOptions {
  std::string config;  ///< empty: built-in defaults
  std::string out;     ///< empty: the config's output directory
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool resume = false;
};

/// Config with the command-line overrides applied.
RunConfig resolve_config(const CommonOptions& opts);
/// --workers, else STLOPT_WORKERS, else the config value.
int resolve_workers(const CommonOptions& opts, int configured);

int cmd_optimize(const CommonOptions& opts, std::ostream& log);
int cmd_sweep(const CommonOptions& opts, std::ostream& log);

struct AnalyzeOptions {
  std::string design;
  std::vector<double> frequencies;  ///< used when non-empty
  double f_min = 100.0;
  double f_max = 5000.0;
  int points = 50;
  double theta_deg = 0.0;
};
int cmd_analyze(const CommonOptions& opts, const AnalyzeOptions& a, std::ostream& log);

struct OracleOptions {
  std::string kind = "masslaw";  ///< masslaw | msm
  double f_min = 50.0;
  double f_max = 10000.0;
  int points = 200;
  std::optional<double> surface_density;  ///< masslaw [kg/m^2]
  std::optional<double> m1, m2;           ///< msm plate masses [kg/m^2]
  double f_d = 3000.0;                    ///< msm decoupling frequency [Hz]
};
int cmd_oracle(const CommonOptions& opts, const OracleOptions& o, std::ostream& log);

struct GradientOptions {
  int probes = 20;
  double step = 1e-6;
  double tolerance = 1e-4;
  double beta1 = 1.0;
};
int cmd_verify_gradients(const CommonOptions& opts, const GradientOptions& g, std::ostream& log);

int cmd_report(const CommonOptions& opts, std::ostream& log);

}  // namespace stlopt::cli
