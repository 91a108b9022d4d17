#include <gtest/gtest.h>

#include <random>

#include "stlopt/constraints.hpp"
#include "stlopt/errors.hpp"
#include "stlopt/sensitivities.hpp"

using namespace stlopt;

TEST(Volume, ReferenceValues) {
  EXPECT_DOUBLE_EQ(volume_constraint(Field::Ones(10), 0.5).value, 1.0);
  EXPECT_DOUBLE_EQ(volume_constraint(Field::Constant(10, 0.5), 0.5).value, 0.0);
  EXPECT_DOUBLE_EQ(volume_constraint(Field::Zero(10), 0.5).value, -1.0);
  const VolumeResult r = volume_constraint(Field::Zero(8), 0.25);
  for (double g : r.gradient) EXPECT_DOUBLE_EQ(g, 0.5);
  EXPECT_THROW(volume_constraint(Field::Zero(8), 0.0), InvalidParameter);
  EXPECT_THROW(volume_constraint(Field(), 0.5), DimensionError);
}

TEST(Volume, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  Field x(50);
  for (auto& v : x) v = u(rng);
  const VolumeResult r = volume_constraint(x, 0.4);
  const FdReport rep = fd_check([](const Field& y) { return volume_constraint(y, 0.4).value; }, x, r.gradient, 20,
                                1e-6, 1);
  EXPECT_LT(rep.max_rel_error, 1e-8);
}

class SelfWeight : public ::testing::Test {
 protected:
  GridSpec grid = GridSpec::square(20);
  MaterialCatalog cat;
  SelfWeightAnalysis sw{grid, cat};

  Field core_void() const {
    Field x = Field::Zero(grid.num_elements());
    apply_plate_mask(x, grid);
    return x;
  }
};

TEST_F(SelfWeight, FullySolidCell) {
  const Field ones = Field::Ones(grid.num_elements());
  const SelfWeightResult r = sw.evaluate(ones, ones);
  EXPECT_GT(r.theta, 0.0);
  EXPECT_NEAR(r.theta, sw.reference_compliance(), 1e-12 * r.theta);
  EXPECT_NEAR(r.J_conn, 1.0 / 15.0 - 1.0, 1e-12);
}

TEST_F(SelfWeight, DisconnectedCoreViolates) {
  const Field x = core_void();
  const SelfWeightResult r = sw.evaluate(x, x);
  EXPECT_GT(r.theta, 0.0);
  EXPECT_GT(r.J_conn, 0.0);
}

TEST_F(SelfWeight, ColumnConnectsPlates) {
  Field x = core_void();
  for (int e = 0; e < grid.num_elements(); ++e) {
    if (grid.element_ix(e) >= 8 && grid.element_ix(e) < 12) x[e] = 1.0;
  }
  const double column = sw.evaluate(x, x).J_conn;
  EXPECT_LT(column, 0.0);
  EXPECT_LT(column, sw.evaluate(core_void(), core_void()).J_conn);
}

TEST_F(SelfWeight, StifferIsBetter) {
  // removing stiffness at fixed load never lowers the compliance
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Field b(grid.num_elements());
  for (auto& v : b) v = u(rng);
  Field e2 = b;
  double last = sw.compliance(b, e2);
  for (int k = 0; k < 4; ++k) {
    e2 *= 0.8;
    const double c = sw.compliance(b, e2);
    EXPECT_GT(c, last);
    last = c;
  }
}

TEST_F(SelfWeight, GradientsMatchFiniteDifferences) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Field b(grid.num_elements()), e2(grid.num_elements());
  for (auto& v : b) v = u(rng);
  for (auto& v : e2) v = u(rng);
  const SelfWeightResult r = sw.evaluate(b, e2);
  const FdReport rb = fd_check([&](const Field& y) { return sw.evaluate(y, e2, false).J_conn; }, b, r.dJ_dxi_b, 20,
                               1e-6, 1, &grid);
  const FdReport re = fd_check([&](const Field& y) { return sw.evaluate(b, y, false).J_conn; }, e2, r.dJ_dxi_e2, 20,
                               1e-6, 2, &grid);
  EXPECT_LT(rb.max_rel_error, 1e-5);
  EXPECT_LT(re.max_rel_error, 1e-5);
}

TEST_F(SelfWeight, ReferenceIsCached) {
  const Field ones = Field::Ones(grid.num_elements());
  const auto n0 = sw.factorizations();
  const double th = sw.reference_compliance();
  EXPECT_EQ(sw.factorizations(), n0);
  sw.evaluate(ones, ones);
  EXPECT_EQ(sw.factorizations(), n0 + 1);
  sw.evaluate(ones, ones, false);
  EXPECT_EQ(sw.factorizations(), n0 + 2);
  EXPECT_EQ(sw.reference_compliance(), th);
}

TEST_F(SelfWeight, RejectsBadInput) {
  EXPECT_THROW(sw.evaluate(Field::Ones(3), Field::Ones(3)), DimensionError);
  Field bad = Field::Ones(grid.num_elements());
  bad[0] = 1.5;
  EXPECT_THROW(sw.evaluate(bad, Field::Ones(grid.num_elements())), DomainError);
}

TEST(ConnectivityBound, LowerBound) {
  EXPECT_DOUBLE_EQ(connectivity_lower_bound(-0.3, -0.5), -0.2);
  EXPECT_NEAR(connectivity_lower_bound(-0.7, -0.5), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(connectivity_lower_bound(-0.5, -0.5), 0.0);
  EXPECT_THROW(connectivity_lower_bound(0.0, -1.0), InvalidParameter);
  EXPECT_THROW(connectivity_lower_bound(0.0, 0.1), InvalidParameter);
}

TEST(ConnectivityBound, AdaptiveGrid) {
  EXPECT_NEAR(adaptive_connectivity_bound(-0.37), -0.35, 1e-12);
  EXPECT_NEAR(adaptive_connectivity_bound(-0.63), -0.60, 1e-12);
  EXPECT_NEAR(adaptive_connectivity_bound(-0.001), -0.05, 1e-12);
  EXPECT_NEAR(adaptive_connectivity_bound(0.2), -0.05, 1e-12);
  EXPECT_NEAR(adaptive_connectivity_bound(-0.35), -0.30, 1e-12);
  EXPECT_GT(adaptive_connectivity_bound(-0.9999), -1.0);
  EXPECT_THROW(adaptive_connectivity_bound(-0.3, std::nullopt, 0.0), InvalidParameter);
}

TEST(ConnectivityBound, AdaptiveIsMonotone) {
  std::optional<double> prev;
  for (double j : {-0.63, -0.70, -0.41, -0.52, -0.12, -0.33}) {
    const double b = adaptive_connectivity_bound(j, prev);
    if (prev) EXPECT_GE(b, *prev);
    EXPECT_GT(b, j);
    prev = b;
  }
  EXPECT_NEAR(*prev, -0.10, 1e-12);
}
