#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stlopt {

/// Parameters of the method of moving asymptotes.
struct MmaConfig {
  double s_init = 0.2;
  double s_decr = 0.65;
  double s_incr = 1.06;
  double move = 0.1;     ///< outer move limit, fraction of the variable range
  double albefa = 0.1;
  double raa0 = 1e-5;
  double asy_min = 1e-5;  ///< closest asymptote distance, fraction of the range
  double asy_max = 10.0;  ///< farthest asymptote distance, fraction of the range
  double a0 = 1.0;
  double c = 1000.0;
  double d = 1.0;
  double epsimin = 1e-10;

  void validate() const;
  bool operator==(const MmaConfig&) const = default;
};

/// Convex separable subproblem data in the standard MMA form
///
///   min f0(x) + a0 z + sum(c_i y_i + d_i y_i^2 / 2)
///   s.t. f_i(x) - a_i z - y_i <= 0.
struct SubproblemSpec {
  double f0 = 0.0;
  Eigen::VectorXd df0;
  Eigen::VectorXd fval;   ///< m constraint values
  Eigen::MatrixXd dfdx;   ///< m x n
  Eigen::VectorXd a;      ///< m entries, 1 for STL epigraph rows
  std::vector<std::string> labels;

  int num_constraints() const { return static_cast<int>(fval.size()); }
};

/// One design realization: objective value and gradient.
struct ObjectiveTerm {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Constraint rows shared by both formulations.
struct ConstraintTerm {
  std::string label;
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Epigraph form: min z s.t. J_i - z <= 0 plus the ordinary constraints.
SubproblemSpec formulate_minmax(const std::vector<ObjectiveTerm>& objectives,
                                const std::vector<ConstraintTerm>& constraints);
/// Summed objective with the ordinary constraints and no slack.
SubproblemSpec formulate_aggregated(const std::vector<ObjectiveTerm>& objectives,
                                    const std::vector<ConstraintTerm>& constraints);

struct MmaResult {
  Eigen::VectorXd x;
  double z = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd lambda;
  double kkt_residual = 0.0;  ///< max-norm of the subproblem KKT residual
  int newton_iterations = 0;
};

/// Stateful MMA iterator holding the asymptotes and the two previous
/// iterates.
class MmaSolver {
 public:
  MmaSolver(int n, const MmaConfig& cfg = {});

  /// Next iterate from x. `xmin`/`xmax` are the global bounds used for
  /// the asymptotes; `box_lo`/`box_hi`, when given, further restrict the
  /// step.
  MmaResult step(const Eigen::VectorXd& x, const SubproblemSpec& sp, const Eigen::VectorXd& xmin,
                 const Eigen::VectorXd& xmax, const Eigen::VectorXd* box_lo = nullptr,
                 const Eigen::VectorXd* box_hi = nullptr);

  /// Forgets the iterate history (asymptotes restart from s_init).
  void reset();

  int iteration() const { return iter_; }
  const Eigen::VectorXd& low() const { return low_; }
  const Eigen::VectorXd& upp() const { return upp_; }
  /// Scaling applied to each asymptote interval in the last step.
  const Eigen::VectorXd& asymptote_factor() const { return factor_; }
  const MmaConfig& config() const { return cfg_; }

 private:
  int n_;
  MmaConfig cfg_;
  int iter_ = 0;
  Eigen::VectorXd xold1_, xold2_, low_, upp_, factor_;
};

/// State of the adaptive extra move limit.
struct MoveLimitState {
  double mu2 = 0.05;
  double mu2_max = 1.0;
  int oscillation_count = 0;
  int improvement_count = 0;
  bool operator==(const MoveLimitState&) const = default;
};

/// Adaptive move limit driven by the per-iteration STL changes.
class MoveLimitController {
 public:
  struct Params {
    double initial = 0.05;
    double threshold_db = 0.01;    ///< oscillation magnitude threshold
    double improvement_db = 0.02;  ///< improvement threshold on min STL
    int window = 5;
    double growth = 1.5;
    double floor = 1e-4;
  };

  MoveLimitController() : MoveLimitController(Params{}) {}
  explicit MoveLimitController(const Params& p);

  /// Restores the stage-start state.
  void reset_stage();
  /// Feeds the STL values after an iteration and the max step taken to
  /// reach them. Returns the updated state.
  const MoveLimitState& update(const std::vector<double>& stl, double step_inf);

  const MoveLimitState& state() const { return state_; }
  double mu2() const { return state_.mu2; }

 private:
  Params p_;
  MoveLimitState state_;
  std::optional<std::vector<double>> last_stl_;
  std::optional<std::vector<double>> last_delta_;
};

}  // namespace stlopt
