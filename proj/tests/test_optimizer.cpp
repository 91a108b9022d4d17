#include <gtest/gtest.h>

#include "stlopt/errors.hpp"
#include "stlopt/optimizer.hpp"

using namespace stlopt;

namespace {

// Constant responses: every stage converges after window + 1 evaluations.
class FlatProblem : public DesignProblem {
 public:
  explicit FlatProblem(int n, double stl = 40.0, double ml = 39.0) : n_(n), stl_(stl), ml_(ml) {}
  int num_variables() const override { return n_; }
  std::vector<int> free_variables() const override {
    std::vector<int> v;
    for (int i = 1; i < n_; ++i) v.push_back(i);
    return v;
  }
  ProblemEvaluation evaluate(const Field&, const StageState& stage, bool) override {
    ++calls;
    ProblemEvaluation e;
    e.designs = stage.formulation == Formulation::blueprint_only
                    ? std::vector<DesignTag>{DesignTag::blueprint}
                    : std::vector<DesignTag>{DesignTag::blueprint, DesignTag::eroded, DesignTag::dilated};
    for (std::size_t k = 0; k < e.designs.size(); ++k) {
      e.stl.push_back(stl_ - static_cast<double>(k));
      e.dstl.push_back(Field::Zero(n_));
    }
    e.J_vol = -0.1;
    e.dJ_vol = Field::Zero(n_);
    e.J_conn = -0.5;
    e.dJ_conn = Field::Zero(n_);
    return e;
  }
  double mass_law_reference(double) const override { return ml_; }
  int calls = 0;

 private:
  int n_;
  double stl_, ml_;
};

// Smooth concave STL in a volume-limited box.
class QuadraticProblem : public DesignProblem {
 public:
  int num_variables() const override { return 6; }
  std::vector<int> free_variables() const override { return {0, 1, 2, 3, 4, 5}; }
  ProblemEvaluation evaluate(const Field& x, const StageState&, bool) override {
    ProblemEvaluation e;
    e.designs = {DesignTag::blueprint};
    const Field t = Field::LinSpaced(6, 0.1, 0.9);
    e.stl = {60.0 - 10.0 * (x - t).squaredNorm()};
    e.dstl = {-20.0 * (x - t)};
    e.J_vol = x.mean() / 0.4 - 1.0;
    e.dJ_vol = Field::Constant(6, 1.0 / (6 * 0.4));
    e.J_conn = -0.5;
    e.dJ_conn = Field::Zero(6);
    return e;
  }
  double mass_law_reference(double) const override { return 50.0; }
};

OptimizationSettings settings_for(StrategyKind k, int budget = 5000) {
  OptimizationSettings s;
  s.strategy = StrategyVariant::make(k);
  s.max_iterations = budget;
  return s;
}

}  // namespace

TEST(Optimizer, FlatStagesLastWindowPlusOne) {
  FlatProblem p(8);
  const OptimizationResult r = run_optimization(p, Field::Constant(8, 0.5), settings_for(StrategyKind::baseline));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.termination, "converged");
  EXPECT_EQ(r.transitions.size(), 23u);
  EXPECT_EQ(r.iterations, 24 * 6);
  EXPECT_EQ(p.calls, r.iterations);
  ASSERT_EQ(r.history.size(), static_cast<std::size_t>(r.iterations));
  for (std::size_t k = 0; k < r.transitions.size(); ++k) {
    EXPECT_EQ(r.transitions[k].iteration, static_cast<int>(6 * (k + 1)));
    EXPECT_EQ(r.transitions[k].to_stage, r.transitions[k].from_stage + 1);
  }
  EXPECT_EQ(r.final_stage.beta1, 64.0);
  EXPECT_EQ(r.history.front().stl_b, 40.0);
  EXPECT_EQ(r.history.front().stl_e, 39.0);
  EXPECT_EQ(r.history.front().stl_d, 38.0);
  EXPECT_EQ(r.stl_star, 38.0);
  EXPECT_EQ(r.xi[0], 0.5);
}

TEST(Optimizer, BudgetStops) {
  FlatProblem p(4);
  const OptimizationResult r = run_optimization(p, Field::Constant(4, 0.5), settings_for(StrategyKind::baseline, 20));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.termination, "budget");
  EXPECT_EQ(r.iterations, 20);
}

TEST(Optimizer, StageParametersAreMonotone) {
  for (auto k : {StrategyKind::baseline, StrategyKind::E3, StrategyKind::F2, StrategyKind::R1, StrategyKind::R2,
                 StrategyKind::R3}) {
    FlatProblem p(4, 50.0, 39.0);
    const OptimizationResult r = run_optimization(p, Field::Constant(4, 0.5), settings_for(k));
    ASSERT_TRUE(r.converged) << to_string(k);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      EXPECT_GE(r.history[i].beta1, r.history[i - 1].beta1);
      EXPECT_GE(r.history[i].delta_eta, r.history[i - 1].delta_eta);
      EXPECT_LE(r.history[i].omega_star, r.history[i - 1].omega_star);
      EXPECT_GE(r.history[i].stage, r.history[i - 1].stage);
    }
    EXPECT_EQ(r.final_stage.beta1, 64.0);
    EXPECT_EQ(r.final_stage.delta_eta, 0.1);
    EXPECT_EQ(r.final_stage.omega_star, 0.0);
    EXPECT_EQ(r.final_stage.formulation, Formulation::minmax);
  }
}

TEST(Optimizer, BaselineStageCount) {
  FlatProblem p(4);
  const OptimizationResult r = run_optimization(p, Field::Constant(4, 0.5), settings_for(StrategyKind::baseline));
  EXPECT_LE(r.final_stage.stage_index + 1, 24);
}

TEST(Optimizer, BlueprintOnlyLogsNaN) {
  FlatProblem p(4, 50.0, 39.0);
  const OptimizationResult r = run_optimization(p, Field::Constant(4, 0.5), settings_for(StrategyKind::R2));
  EXPECT_TRUE(std::isnan(r.history.front().stl_e));
  EXPECT_EQ(r.history.front().formulation, Formulation::blueprint_only);
  EXPECT_FALSE(std::isnan(r.history.back().stl_e));
}

TEST(Optimizer, ImprovesSmoothProblem) {
  QuadraticProblem p;
  const Field x0 = Field::Constant(6, 0.1);
  const OptimizationResult r = run_optimization(p, x0, settings_for(StrategyKind::baseline, 400));
  const double start = p.evaluate(x0, StageState{}, false).stl[0];
  EXPECT_GT(r.stl_star, start);
  EXPECT_LE(r.final_evaluation.J_vol, 1e-3);
  for (double v : r.xi) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Optimizer, Deterministic) {
  QuadraticProblem a, b;
  const Field x0 = Field::Constant(6, 0.2);
  const auto ra = run_optimization(a, x0, settings_for(StrategyKind::baseline, 60));
  const auto rb = run_optimization(b, x0, settings_for(StrategyKind::baseline, 60));
  EXPECT_EQ(ra.xi, rb.xi);
  EXPECT_EQ(ra.iterations, rb.iterations);
}

TEST(Optimizer, CallbackSeesEveryIteration) {
  FlatProblem p(4);
  int seen = 0;
  const auto r = run_optimization(p, Field::Constant(4, 0.5), settings_for(StrategyKind::baseline, 30),
                                  [&](const IterationRecord& rec) { EXPECT_EQ(rec.iteration, ++seen); });
  EXPECT_EQ(seen, r.iterations);
}

TEST(Optimizer, RejectsBadInput) {
  FlatProblem p(4);
  EXPECT_THROW(run_optimization(p, Field::Zero(3), settings_for(StrategyKind::baseline)), DimensionError);
  EXPECT_THROW(run_optimization(p, Field::Zero(4), settings_for(StrategyKind::baseline, 0)), InvalidParameter);
}
