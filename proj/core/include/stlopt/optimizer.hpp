#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stlopt/constraints.hpp"
#include "stlopt/continuation.hpp"
#include "stlopt/design_field.hpp"
#include "stlopt/mma.hpp"
#include "stlopt/sensitivities.hpp"

namespace stlopt {

/// Objective and constraint values of one iterate together with their
/// gradients with respect to the raw variables.
struct ProblemEvaluation {
  std::vector<DesignTag> designs;  ///< realizations entering the objective
  std::vector<double> stl;         ///< band STL per entry of `designs` [dB]
  std::vector<Field> dstl;         ///< gradients of `stl`
  double J_vol = 0.0;
  Field dJ_vol;
  double J_conn = 0.0;
  Field dJ_conn;

  double stl_star() const;
};

/// Interface between the optimization driver and a concrete model.
class DesignProblem {
 public:
  virtual ~DesignProblem() = default;
  virtual int num_variables() const = 0;
  /// Variables the optimizer may change (the rest stay at their value).
  virtual std::vector<int> free_variables() const = 0;
  virtual ProblemEvaluation evaluate(const Field& xi, const StageState& stage, bool with_gradient) = 0;
  /// Equal-mass single plate STL on the target band shifted by `shift` Hz.
  virtual double mass_law_reference(double shift) const = 0;
};

/// Topology optimization of the sandwich core on a FEM unit cell.
class FemDesignProblem : public DesignProblem {
 public:
  FemDesignProblem(const GridSpec& grid, const MaterialCatalog& cat, const FilterSpec& filter,
                   const FrequencyBand& band, double volume_fraction = 0.5);

  int num_variables() const override { return grid_.num_elements(); }
  std::vector<int> free_variables() const override;
  ProblemEvaluation evaluate(const Field& xi, const StageState& stage, bool with_gradient) override;
  double mass_law_reference(double shift) const override;

  /// Filter parameters of `stage`.
  FilterSpec filter_for(const StageState& stage) const;
  PhysicalDesignSet physical_designs(const Field& xi, const StageState& stage) const;

  const GridSpec& grid() const { return grid_; }
  const MaterialCatalog& catalog() const { return cat_; }
  const FrequencyBand& band() const { return band_; }
  const SelfWeightAnalysis& self_weight() const { return self_weight_; }

 private:
  GridSpec grid_;
  MaterialCatalog cat_;
  FilterSpec filter_;
  FrequencyBand band_;
  double volume_fraction_;
  FilterChain chain_;
  SelfWeightAnalysis self_weight_;
  BandAnalysis analysis_;
};

/// One row of the iteration log.
struct IterationRecord {
  int iteration = 0;
  int stage = 0;
  double stl_b = 0.0, stl_e = 0.0, stl_d = 0.0;  ///< NaN when not evaluated
  double stl_star = 0.0;
  double J_vol = 0.0;
  double J_conn = 0.0;
  std::optional<double> j_min;
  double beta1 = 0.0;
  double delta_eta = 0.0;
  double omega_star = 0.0;
  double mu2 = 0.0;
  Formulation formulation = Formulation::minmax;
  double step_inf = 0.0;  ///< max change of the step that produced this iterate
  double kkt = 0.0;       ///< subproblem residual of that step
};

struct StageTransition {
  int iteration = 0;
  int from_stage = 0;
  int to_stage = 0;
  std::vector<std::string> rules;
  StageState stage;
};

struct OptimizationSettings {
  StrategyVariant strategy;
  MmaConfig mma;
  ConvergenceCriterion convergence;
  MoveLimitController::Params move_limit;
  int max_iterations = 5000;
};

struct OptimizationResult {
  Field xi;
  bool converged = false;
  int iterations = 0;  ///< objective evaluations performed
  std::vector<IterationRecord> history;
  std::vector<StageTransition> transitions;
  StageState final_stage;
  ProblemEvaluation final_evaluation;
  double stl_star = 0.0;
  std::string termination;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Staged MMA optimization: evaluate, test convergence, change stage or
/// take a step, until the schedules are exhausted or the budget is spent.
OptimizationResult run_optimization(DesignProblem& problem, const Field& xi0, const OptimizationSettings& settings,
                                    const IterationCallback& on_iteration = {});

}  // namespace stlopt
