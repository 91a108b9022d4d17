#include <gtest/gtest.h>

#include <cmath>

#include "stlopt/errors.hpp"
#include "stlopt/mma.hpp"

using namespace stlopt;
using Eigen::VectorXd;

namespace {

struct Box {
  VectorXd lo, hi;
  explicit Box(int n) : lo(VectorXd::Zero(n)), hi(VectorXd::Ones(n)) {}
};

ObjectiveTerm term(double v, VectorXd g) { return ObjectiveTerm{v, std::move(g)}; }

}  // namespace

TEST(MmaConfig, Validation) {
  EXPECT_NO_THROW(MmaConfig{}.validate());
  MmaConfig c;
  c.s_decr = 1.2;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = MmaConfig{};
  c.move = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = MmaConfig{};
  c.asy_min = 20.0;
  EXPECT_THROW(MmaSolver(3, c), InvalidParameter);
}

TEST(Formulation, MinMaxRows) {
  const std::vector<ObjectiveTerm> obj{term(1.0, VectorXd::Constant(3, 1.0)), term(2.0, VectorXd::Constant(3, 2.0))};
  const std::vector<ConstraintTerm> con{{"vol", -0.1, VectorXd::Constant(3, 0.5)}};
  const SubproblemSpec s = formulate_minmax(obj, con);
  ASSERT_EQ(s.num_constraints(), 3);
  EXPECT_EQ(s.f0, 0.0);
  EXPECT_EQ(s.df0.squaredNorm(), 0.0);
  EXPECT_EQ(s.a[0], 1.0);
  EXPECT_EQ(s.a[1], 1.0);
  EXPECT_EQ(s.a[2], 0.0);
  EXPECT_EQ(s.fval[1], 2.0);
  EXPECT_EQ(s.fval[2], -0.1);
  EXPECT_EQ(s.dfdx(2, 1), 0.5);
  EXPECT_EQ(s.labels.back(), "vol");
}

TEST(Formulation, AggregatedSums) {
  const std::vector<ObjectiveTerm> obj{term(1.0, VectorXd::LinSpaced(3, 0, 2)), term(2.5, VectorXd::Constant(3, 1))};
  const std::vector<ConstraintTerm> con{{"vol", 0.2, VectorXd::Ones(3)}, {"conn", -0.3, VectorXd::Zero(3)}};
  const SubproblemSpec s = formulate_aggregated(obj, con);
  ASSERT_EQ(s.num_constraints(), 2);
  EXPECT_DOUBLE_EQ(s.f0, 3.5);
  EXPECT_EQ(s.df0, (VectorXd(3) << 1, 2, 3).finished());
  EXPECT_EQ(s.a.squaredNorm(), 0.0);
}

TEST(Formulation, EqualDesignsAgree) {
  // with identical realizations min-max and sum share their minimizer
  const std::vector<ObjectiveTerm> one{term(0.4, VectorXd::Constant(2, 0.3))};
  const std::vector<ObjectiveTerm> two{one[0], one[0]};
  const SubproblemSpec a = formulate_aggregated(two, {});
  EXPECT_DOUBLE_EQ(a.f0, 0.8);
  EXPECT_EQ(formulate_minmax(two, {}).num_constraints(), 2);
  EXPECT_THROW(formulate_minmax({}, {}), InvalidParameter);
  EXPECT_THROW(formulate_aggregated({term(0, VectorXd::Ones(2)), term(0, VectorXd::Ones(3))}, {}), DimensionError);
}

TEST(MmaSolver, UnconstrainedQuadratic) {
  const VectorXd target = (VectorXd(2) << 0.3, 0.7).finished();
  MmaSolver mma(2);
  Box b(2);
  VectorXd x = VectorXd::Constant(2, 0.95);
  int it = 0;
  for (; it < 50 && (x - target).norm() > 1e-5; ++it) {
    SubproblemSpec sp = formulate_aggregated({term((x - target).squaredNorm(), 2 * (x - target))}, {});
    x = mma.step(x, sp, b.lo, b.hi).x;
  }
  EXPECT_LE(it, 50);
  EXPECT_NEAR(x[0], 0.3, 1e-4);
  EXPECT_NEAR(x[1], 0.7, 1e-4);
}

TEST(MmaSolver, LinearConstraintActive) {
  // min sum x^2 s.t. sum x >= 1 has x_i = 1/n
  const int n = 4;
  MmaSolver mma(n);
  Box b(n);
  VectorXd x = VectorXd::LinSpaced(n, 0.1, 0.9);
  MmaResult r;
  for (int it = 0; it < 100; ++it) {
    const SubproblemSpec sp = formulate_aggregated({term(x.squaredNorm(), 2 * x)},
                                                   {{"sum", 1.0 - x.sum(), VectorXd::Constant(n, -1.0)}});
    r = mma.step(x, sp, b.lo, b.hi);
    x = r.x;
  }
  for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], 0.25, 1e-4);
  EXPECT_GT(r.lambda[0], 0.0);
  EXPECT_LT(r.y[0], 1e-6);
}

TEST(MmaSolver, MinMaxOfTwoParabolas) {
  MmaSolver mma(1);
  Box b(1);
  VectorXd x = VectorXd::Constant(1, 0.9);
  for (int it = 0; it < 150; ++it) {
    const double v = x[0];
    const SubproblemSpec sp = formulate_minmax(
        {term(v * v, VectorXd::Constant(1, 2 * v)), term((v - 1) * (v - 1), VectorXd::Constant(1, 2 * (v - 1)))}, {});
    x = mma.step(x, sp, b.lo, b.hi).x;
  }
  EXPECT_NEAR(x[0], 0.5, 1e-3);
}

TEST(MmaSolver, SubproblemKkt) {
  MmaSolver mma(5);
  Box b(5);
  VectorXd x = VectorXd::Constant(5, 0.5);
  for (int it = 0; it < 5; ++it) {
    const SubproblemSpec sp = formulate_minmax({term(x.sum(), VectorXd::Ones(5)), term(-x.sum(), -VectorXd::Ones(5))},
                                               {{"vol", x.mean() - 0.4, VectorXd::Constant(5, 0.2)}});
    const MmaResult r = mma.step(x, sp, b.lo, b.hi);
    EXPECT_LT(r.kkt_residual, 1e-8);
    x = r.x;
  }
}

TEST(MmaSolver, AsymptoteFactors) {
  MmaSolver mma(3);
  Box b(3);
  const SubproblemSpec sp = formulate_aggregated({term(0.0, VectorXd::Ones(3))}, {});
  const VectorXd x0 = (VectorXd(3) << 0.5, 0.5, 0.5).finished();
  const VectorXd x1 = (VectorXd(3) << 0.6, 0.6, 0.5).finished();
  const VectorXd x2 = (VectorXd(3) << 0.5, 0.7, 0.5).finished();
  mma.step(x0, sp, b.lo, b.hi);
  mma.step(x1, sp, b.lo, b.hi);
  EXPECT_NEAR(mma.low()[0], 0.6 - 0.2, 1e-15);
  mma.step(x2, sp, b.lo, b.hi);
  const VectorXd f = mma.asymptote_factor();
  EXPECT_DOUBLE_EQ(f[0], 0.65);
  EXPECT_DOUBLE_EQ(f[1], 1.06);
  EXPECT_DOUBLE_EQ(f[2], 1.0);
  EXPECT_NEAR(mma.low()[0], 0.5 - 0.65 * 0.2, 1e-12);
  EXPECT_NEAR(mma.upp()[1], 0.7 + 1.06 * 0.2, 1e-12);
}

TEST(MmaSolver, RespectsBoxes) {
  MmaSolver mma(4);
  Box b(4);
  const VectorXd lo = VectorXd::Constant(4, 0.45), hi = VectorXd::Constant(4, 0.52);
  VectorXd x = VectorXd::Constant(4, 0.5);
  for (int it = 0; it < 5; ++it) {
    const SubproblemSpec sp = formulate_aggregated({term(-x.sum(), -VectorXd::Ones(4))}, {});
    const VectorXd nx = mma.step(x, sp, b.lo, b.hi, &lo, &hi).x;
    EXPECT_LE((nx - x).cwiseAbs().maxCoeff(), 0.1 + 1e-12);
    for (int i = 0; i < 4; ++i) {
      EXPECT_GE(nx[i], lo[i] - 1e-12);
      EXPECT_LE(nx[i], hi[i] + 1e-12);
    }
    x = nx;
  }
  EXPECT_NEAR(x[0], 0.52, 1e-6);
}

TEST(MmaSolver, Deterministic) {
  auto run = [] {
    MmaSolver mma(6);
    Box b(6);
    VectorXd x = VectorXd::LinSpaced(6, 0.2, 0.8);
    for (int it = 0; it < 10; ++it) {
      const VectorXd g = (x.array() - 0.33).matrix() * 2;
      x = mma.step(x, formulate_aggregated({term((x.array() - 0.33).square().sum(), g)}, {}), b.lo, b.hi).x;
    }
    return x;
  };
  EXPECT_EQ(run(), run());
}

TEST(MmaSolver, ResetForgetsHistory) {
  MmaSolver mma(2);
  Box b(2);
  const SubproblemSpec sp = formulate_aggregated({term(0.0, VectorXd::Ones(2))}, {});
  for (double v : {0.5, 0.6, 0.5}) mma.step(VectorXd::Constant(2, v), sp, b.lo, b.hi);
  mma.reset();
  EXPECT_EQ(mma.iteration(), 0);
  mma.step(VectorXd::Constant(2, 0.5), sp, b.lo, b.hi);
  EXPECT_NEAR(mma.low()[0], 0.3, 1e-15);
}

TEST(MmaSolver, RejectsBadInput) {
  MmaSolver mma(2);
  Box b(2);
  SubproblemSpec sp = formulate_aggregated({term(0.0, VectorXd::Ones(2))}, {});
  EXPECT_THROW(mma.step(VectorXd::Ones(3), sp, b.lo, b.hi), DimensionError);
  sp.df0[0] = std::nan("");
  EXPECT_THROW(mma.step(VectorXd::Constant(2, 0.5), sp, b.lo, b.hi), DomainError);
}

TEST(MoveLimit, ScriptedTransitions) {
  MoveLimitController ml;
  EXPECT_DOUBLE_EQ(ml.mu2(), 0.05);
  ml.update({50.0, 50.0}, 0.04);
  ml.update({50.1, 50.0}, 0.04);
  for (int k = 0; k < 5; ++k) {
    EXPECT_DOUBLE_EQ(ml.mu2(), 0.05) << k;
    ml.update({k % 2 == 0 ? 50.0 : 50.1, 50.0}, 0.04);
    EXPECT_EQ(ml.state().oscillation_count, k < 4 ? k + 1 : 0);
  }
  EXPECT_NEAR(ml.mu2(), 0.02, 1e-15);
  EXPECT_NEAR(ml.state().mu2_max, 0.05, 1e-15);
  double base = 50.0;
  for (int k = 0; k < 5; ++k) {
    base += 0.5;
    ml.update({base, base + 1}, 0.01);
  }
  EXPECT_NEAR(ml.mu2(), 0.03, 1e-15);
  for (int k = 0; k < 5; ++k) {
    base += 0.5;
    ml.update({base, base + 1}, 0.01);
  }
  EXPECT_NEAR(ml.mu2(), 0.045, 1e-15);
  for (int k = 0; k < 5; ++k) {
    base += 0.5;
    ml.update({base, base + 1}, 0.01);
  }
  EXPECT_NEAR(ml.mu2(), 0.05, 1e-15);
}

TEST(MoveLimit, SmallChangesAreNotOscillations) {
  MoveLimitController ml;
  double s = 1.0;
  for (int k = 0; k < 20; ++k) {
    s = -s;
    ml.update({50.0 + 0.004 * s}, 0.04);
  }
  EXPECT_DOUBLE_EQ(ml.mu2(), 0.05);
  EXPECT_EQ(ml.state().oscillation_count, 0);
}

TEST(MoveLimit, ResetRestoresInitialState) {
  MoveLimitController ml;
  for (int k = 0; k < 8; ++k) ml.update({50.0 + k}, 0.01);
  EXPECT_GT(ml.mu2(), 0.05);
  ml.reset_stage();
  EXPECT_EQ(ml.state(), MoveLimitState{});
  EXPECT_THROW(ml.update({}, 0.0), InvalidParameter);
}
