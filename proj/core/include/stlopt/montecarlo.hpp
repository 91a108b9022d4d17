#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stlopt/optimizer.hpp"
#include "stlopt/random.hpp"

namespace stlopt {

/// Ratio of STL* to the equal-mass plate STL from which an optimum counts
/// as high-performing.
inline constexpr double kHighPerformanceRatio = 1.1;

enum class Performance { high, low };
const char* to_string(Performance p);

/// HP iff stl_star >= 1.1 stl_ml.
Performance classify(double stl_star, double stl_ml);

enum class Region { low, transition, high };
const char* to_string(Region r);
/// <= 20 % low, >= 80 % high, transition in between.
Region region_for(double p_hp_percent);

/// Outcome of one seeded optimization.
struct RunRecord {
  std::string strategy;
  int band_index = 0;
  FrequencyBand band;
  std::uint64_t seed = 0;
  int run_index = 0;
  int iterations = 0;
  double stl_star = 0.0;
  double stl_ml = 0.0;
  Performance classification = Performance::low;
  bool converged = false;
  std::string termination;
  std::string design_path;  ///< relative to the campaign directory
  std::optional<std::string> error;  ///< set when the run failed

  bool failed() const { return error.has_value(); }
  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

struct EnsembleStats {
  int n_hp = 0;
  int n_lp = 0;
  double p_hp = 0.0;             ///< [%]
  double standard_error = 0.0;   ///< [%]
  std::optional<double> stl_hp_mean;
  std::optional<double> n_iter_hp_mean;
  Region region = Region::low;

  int size() const { return n_hp + n_lp; }
  /// Normal-approximation interval p +- z SE, clipped to [0, 100].
  std::pair<double, double> confidence_interval(double z = 1.96) const;
};

/// HP percentage, binomial standard error and region label.
/// Failed runs are ignored; an empty ensemble throws DomainError.
EnsembleStats estimate_p_hp(const std::vector<RunRecord>& records);
EnsembleStats estimate_p_hp(int n_hp, int n_lp);

struct HpCriteria {
  std::optional<double> stl_hp;
  std::optional<double> n_iter_hp;
};
/// Means over the HP records; both absent without HP records.
HpCriteria aggregate_criteria(const std::vector<RunRecord>& records);

/// Builds the model optimized by one run of a campaign.
using ProblemFactory = std::function<std::unique_ptr<DesignProblem>(const FrequencyBand& band)>;

struct CampaignSpec {
  GridSpec grid = GridSpec::square(40);
  MaterialCatalog materials;
  double filter_r1 = 0.0;  ///< [m], 0 selects the grid default
  double filter_r2 = 0.0;
  double volume_fraction = 0.5;
  std::vector<FrequencyBand> bands;
  std::vector<StrategyKind> strategies{StrategyKind::baseline};
  int runs_per_cell = 5;
  std::uint64_t seed = 1;
  OptimizationSettings settings;  ///< strategy member is overwritten per cell
  int workers = 1;
  bool write_designs = true;
  bool write_histories = false;
};

/// Fem-backed factory for the grid, materials and filter of `spec`.
ProblemFactory fem_problem_factory(const CampaignSpec& spec);

struct CampaignCell {
  int band_index = 0;
  FrequencyBand band;
  std::string strategy;
  EnsembleStats stats;
};

struct CampaignResult {
  std::vector<RunRecord> records;
  std::vector<CampaignCell> cells;
  int executed = 0;  ///< runs performed in this call
  int skipped = 0;   ///< runs found on disk
};

/// File name of the record of one run inside `<dir>/records`.
std::string record_file_name(StrategyKind strategy, int band_index, int run_index);

/// Runs every (band, strategy, run) cell not already persisted under `dir`.
///
/// Each run starts from random_initial_guess({seed, band, run}) so all
/// strategies of a band share their initial guesses. Records are written
/// atomically as they finish; stats.csv and scatter.csv are rewritten at
/// the end. A throwing run yields a record with `error` set.
CampaignResult run_campaign(const CampaignSpec& spec, const std::filesystem::path& dir,
                            const ProblemFactory& factory = {},
                            const std::function<void(const RunRecord&)>& on_record = {});

/// Loads every record under `<dir>/records`.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

/// Groups records by (band, strategy) and computes the ensemble stats.
std::vector<CampaignCell> tabulate(const std::vector<RunRecord>& records);

/// CSV with columns band, strategy, n_hp, n_lp, p_hp, se, stl_hp, n_iter_hp, region.
std::string format_stats_csv(const std::vector<CampaignCell>& cells);
/// One row per record: band limits, strategy, seed, run, stl_star, stl_ml, ratio, class.
std::string format_scatter_csv(const std::vector<RunRecord>& records);

}  // namespace stlopt
