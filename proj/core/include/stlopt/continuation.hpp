#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stlopt/transmission.hpp"

namespace stlopt {

enum class Formulation { minmax, aggregated, blueprint_only };

const char* to_string(Formulation f);
Formulation parse_formulation(const std::string& s);

/// Hyperparameters held constant during one stage.
struct StageState {
  double beta1 = 1.0;
  double beta2 = 0.5;
  double delta_eta = 0.1;
  double omega_star = 0.0;  ///< excess frequency [Hz]
  std::optional<double> j_min;
  Formulation formulation = Formulation::minmax;
  int stage_index = 0;
  int beta_steps = 0;

  bool operator==(const StageState&) const = default;
  /// Equality of the hyperparameters, ignoring the stage counters.
  bool same_parameters(const StageState& o) const;
};

struct ConvergenceCriterion {
  double constraint_tol = 0.01;
  double stl_tol = 0.01;  ///< [dB]
  int window = 5;

  void validate() const;
  bool operator==(const ConvergenceCriterion&) const = default;
};

/// Values of one iteration as seen by the convergence test.
struct ConvergenceSample {
  double min_stl = 0.0;
  std::vector<double> constraints;
};

/// True when the stage has at least window + 1 samples, min STL changed by
/// less than stl_tol over each of the last `window` iterations, and the
/// constraints are all satisfied or each changed by less than
/// constraint_tol in the last iteration.
bool check_convergence(const std::vector<ConvergenceSample>& stage_history, const ConvergenceCriterion& crit);

enum class StrategyKind { baseline, E1, E2, E3, F1, F2, F3, F4, R1, R2, R3 };

const char* to_string(StrategyKind k);
/// Accepts the lower-case config keys (baseline, e1, ..., r3).
StrategyKind parse_strategy(const std::string& key);

/// Schedule parameters of a strategy.
struct StrategyVariant {
  StrategyKind kind = StrategyKind::baseline;
  double beta_factor = 1.2;
  double beta_max = 64.0;
  double frequency_step = 100.0;   ///< per-convergence reduction of omega_star [Hz]
  double trigger_ratio = 1.15;     ///< STL* / STL_ml trigger
  double trigger_beta = 50.0;
  double exclusion_beta = 15.0;    ///< E3 activation threshold
  double bound_step = 0.05;        ///< E3 bound granularity
  double eta_step = 0.02;          ///< R2/R3 robustness increments
  double delta_eta_final = 0.1;

  static StrategyVariant make(StrategyKind kind);
  /// omega_star at the start of a frequency-shift strategy, else 0.
  double initial_omega_star() const;
  bool operator==(const StrategyVariant&) const = default;
};

/// Information available to the strategy rules at a convergence.
struct ConvergenceInfo {
  double J_conn = 0.0;
  double stl_star = 0.0;       ///< min band STL over the evaluated designs
  double stl_mass_law = 0.0;   ///< equal-mass single plate on the current (shifted) band
};

/// Stage change decided at a convergence.
struct StageDecision {
  bool finished = false;
  StageState next;
  std::vector<std::string> rules;  ///< rules that fired, in order of application
};

/// State machine of the hyperparameter schedules.
class ContinuationController {
 public:
  explicit ContinuationController(const StrategyVariant& variant);

  StageState initial_stage() const;
  /// Applies the strategy rule first and then the beta step. Returns
  /// finished when no rule changes the hyperparameters.
  StageDecision on_convergence(const StageState& stage, const ConvergenceInfo& info);

  const StrategyVariant& variant() const { return variant_; }
  /// Internal phase of the F/R schedules: 0 before the trigger, 1 while
  /// stepping, 2 after the stepping finished.
  int phase() const { return phase_; }

 private:
  StageState beta_step(const StageState& s) const;
  bool triggered(const StageState& s, const ConvergenceInfo& info) const;

  StrategyVariant variant_;
  int phase_ = 0;
};

/// beta_1 after k steps of the schedule.
double beta_after_steps(int k, double factor = 1.2, double beta_max = 64.0);

}  // namespace stlopt
