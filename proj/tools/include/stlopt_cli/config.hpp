#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stlopt/montecarlo.hpp"

namespace stlopt::cli {

/// Everything a run or campaign needs; defaults reproduce the reference
/// setup so a config only has to name what differs.
struct RunConfig {
  GridSpec grid = GridSpec::full_resolution();
  MaterialCatalog materials;
  double filter_r1 = 7e-3;  ///< [m]
  double filter_r2 = 3.5e-3;
  double eta_b = 0.5;
  double eta_e2 = 0.6;
  double eta_d2 = 0.4;
  double volume_fraction = 0.5;
  std::vector<FrequencyBand> bands{FrequencyBand{}};
  std::vector<StrategyKind> strategies{StrategyKind::baseline};
  MmaConfig mma;
  ConvergenceCriterion convergence;
  MoveLimitController::Params move_limit;
  int max_iterations = 5000;
  int runs_per_cell = 20;
  int workers = 1;
  bool write_designs = true;
  bool write_histories = false;
  std::uint64_t seed = 1;
  std::string output = "stlopt-out";

  void validate() const;
  bool operator==(const RunConfig&) const;

  FilterSpec filter() const;
  OptimizationSettings settings(StrategyKind kind) const;
  CampaignSpec campaign() const;
};

/// Strict parse: unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
/// Complete config with every field spelled out.
nlohmann::json emit_config(const RunConfig& c);

}  // namespace stlopt::cli
