#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stlopt/errors.hpp"
#include "stlopt/transmission.hpp"

using namespace stlopt;

namespace {

// Normal-incidence limp plate: tau = 1 / (1 + (w m / 2 rho c)^2).
double mass_law_oracle(double m, double f) {
  const double x = 2 * std::numbers::pi * f * m / (2 * 1.225 * 340.0);
  return 10 * std::log10(1 + x * x);
}

// 10 mm solid plate resolved by 20 x 20 elements.
GridSpec plate_grid() { return GridSpec{20, 20, 0.5e-3, 0}; }

}  // namespace

TEST(Stl, ComputeStl) {
  EXPECT_DOUBLE_EQ(compute_stl(1.0), 0.0);
  EXPECT_NEAR(compute_stl(0.01), 20.0, 1e-12);
  EXPECT_NEAR(compute_stl(1e-12), kStlNormalization, 1e-9);
  EXPECT_THROW(compute_stl(0.0), DomainError);
  EXPECT_THROW(compute_stl(-1.0), DomainError);
}

TEST(Stl, NormalizedObjective) {
  EXPECT_DOUBLE_EQ(normalized_objective(120.0), 0.0);
  EXPECT_DOUBLE_EQ(normalized_objective(0.0), 1.0);
  EXPECT_DOUBLE_EQ(normalized_objective(60.0), 0.5);
}

TEST(Band, MidpointSamplesAndWeights) {
  const FrequencyBand b{2000, 2500, 5};
  const auto s = b.samples();
  const std::vector<double> expected{2050, 2150, 2250, 2350, 2450};
  ASSERT_EQ(s.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s[i], expected[i], 1e-9);
  double total = 0.0;
  for (double w : b.weights()) total += w;
  EXPECT_NEAR(total / b.width(), 1.0, 1e-15);
  EXPECT_NEAR(band_average({40, 40, 40, 40, 40}, b), 40.0, 1e-12);
  EXPECT_NEAR(band_average({1, 2, 3, 4, 5}, b), 3.0, 1e-12);
  EXPECT_EQ(b.shifted(2000).f_minus, 4000.0);
  EXPECT_THROW((FrequencyBand{2500, 2000, 5}).validate(), InvalidParameter);
  EXPECT_THROW((FrequencyBand{0, 500, 5}).validate(), InvalidParameter);
  EXPECT_THROW(band_average({1, 2}, b), DimensionError);
}

TEST(Band, AverageIsLinear) {
  const FrequencyBand b{500, 1000, 5};
  const std::vector<double> x{1, 5, 2, 7, 3}, y{4, 4, 9, 0, 1};
  std::vector<double> z(5);
  for (int i = 0; i < 5; ++i) z[i] = 2 * x[i] - 3 * y[i];
  EXPECT_NEAR(band_average(z, b), 2 * band_average(x, b) - 3 * band_average(y, b), 1e-12);
}

TEST(MassLaw, ReferencePoint) {
  EXPECT_NEAR(mass_law(11.8835, 1000.0, 0.0), 39.1, 0.05);
  EXPECT_NEAR(mass_law(11.8835, 1000.0, 0.0), mass_law_oracle(11.8835, 1000.0), 1e-12);
}

TEST(MassLaw, LimitsAndSlope) {
  EXPECT_NEAR(mass_law(10.0, 1e-3, 0.0), 0.0, 1e-6);
  EXPECT_NEAR(mass_law(10.0, 2e5, 0.0) - mass_law(10.0, 1e5, 0.0), 20 * std::log10(2.0), 1e-6);
  EXPECT_LT(mass_law(10, 1000, 0.5), mass_law(10, 1000, 0.0));
  EXPECT_THROW(mass_law(-1.0, 100.0, 0.0), InvalidParameter);
}

TEST(MassSpringMass, DipAtDecouplingFrequency) {
  const double m1 = 5.94, m2 = 5.94;
  const double k = spring_for_decoupling(m1, m2, 3000.0);
  EXPECT_NEAR(decoupling_frequency(m1, m2, k), 3000.0, 1e-9);
  EXPECT_NEAR(std::sqrt(k * (m1 + m2) / (m1 * m2)) / (2 * std::numbers::pi), 3000.0, 1e-9);
  double best_f = 0.0, best = 1e9;
  for (double f = 2000.0; f <= 4000.0; f += 1.0) {
    const double s = mass_spring_mass_stl(m1, m2, k, f);
    if (s < best) {
      best = s;
      best_f = f;
    }
  }
  EXPECT_NEAR(best_f, 3000.0, 50.0);
}

TEST(MassSpringMass, Asymptotes) {
  const double m1 = 5.94, m2 = 5.94, fd = 3000.0;
  const double k = spring_for_decoupling(m1, m2, fd);
  const double slope = mass_spring_mass_stl(m1, m2, k, 32 * fd) - mass_spring_mass_stl(m1, m2, k, 16 * fd);
  EXPECT_NEAR(slope, 60 * std::log10(2.0), 0.5);
  for (double f : {50.0, 200.0, 500.0, fd / 4}) {
    EXPECT_NEAR(mass_spring_mass_stl(m1, m2, k, f), mass_law_oracle(m1 + m2, f), 1.0) << f;
  }
}

TEST(EqualMass, SurfaceDensity) {
  const GridSpec g = GridSpec::full_resolution();
  EXPECT_NEAR(equal_mass_surface_density(g, MaterialCatalog{}, 0.5), 1188.35 * 0.5 * 0.05, 1e-9);
}

TEST(Transmission, FullyFluidCellIsTransparent) {
  const GridSpec g{10, 10, 5e-3, 0};
  const SpectrumResult s = analyze_spectrum(Field::Zero(g.num_elements()), g, MaterialCatalog{}, {500.0, 2000.0});
  for (const auto& p : s.samples) {
    EXPECT_NEAR(p.tau, 1.0, 1e-3);
    EXPECT_NEAR(p.stl_db, 0.0, 5e-3);
  }
}

TEST(Transmission, UniformPlateFollowsMassLaw) {
  const GridSpec g = plate_grid();
  const MaterialCatalog cat;
  const double m = cat.rho_s * g.ly();
  std::vector<double> f{500, 707, 1000, 1414, 2000};
  const SpectrumResult s = analyze_spectrum(Field::Ones(g.num_elements()), g, cat, f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(s.samples[i].stl_db, mass_law_oracle(m, f[i]), 1.0);
  EXPECT_NEAR(s.samples[4].stl_db - s.samples[2].stl_db, 6.0, 0.5);
}

TEST(Transmission, DoubleWallMatchesTransferMatrix) {
  // empty core: two limp plates around an air layer
  const GridSpec g = GridSpec::square(20);
  const MaterialCatalog cat;
  Field x = Field::Zero(g.num_elements());
  apply_plate_mask(x, g);
  const double m = cat.rho_s * g.fixed_rows * g.element_size;
  const double d = g.ly() - 2 * g.fixed_rows * g.element_size;
  const std::vector<double> f{1000, 2000, 3250, 5000};
  const SpectrumResult s = analyze_spectrum(x, g, cat, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    using C = std::complex<double>;
    const double w = 2 * std::numbers::pi * f[i];
    const C k = w / cat.c_a, Z = cat.rho_a * cat.c_a;
    const double Z0 = cat.rho_a * cat.c_halfspace;
    const C P[4] = {1.0, C(0, w * m), 0.0, 1.0};
    const C A[4] = {std::cos(k * d), C(0, 1) * Z * std::sin(k * d), C(0, 1) * std::sin(k * d) / Z, std::cos(k * d)};
    auto mul = [](const C* a, const C* b, C* o) {
      o[0] = a[0] * b[0] + a[1] * b[2];
      o[1] = a[0] * b[1] + a[1] * b[3];
      o[2] = a[2] * b[0] + a[3] * b[2];
      o[3] = a[2] * b[1] + a[3] * b[3];
    };
    C PA[4], T[4];
    mul(P, A, PA);
    mul(PA, P, T);
    const double tau = std::norm(2.0 / (T[0] + T[1] / Z0 + T[2] * Z0 + T[3]));
    EXPECT_NEAR(s.samples[i].stl_db, -10 * std::log10(tau), 1.0) << f[i];
  }
}

TEST(Transmission, PassivityOnRandomDesigns) {
  const GridSpec g = GridSpec::square(12);
  const MaterialCatalog cat;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0), uf(50.0, 8000.0);
  for (int t = 0; t < 20; ++t) {
    Field x(g.num_elements());
    for (auto& v : x) v = u(rng);
    apply_plate_mask(x, g);
    std::vector<double> f(3);
    for (auto& v : f) v = uf(rng);
    for (const auto& p : analyze_spectrum(x, g, cat, f).samples) {
      EXPECT_GT(p.tau, 0.0);
      EXPECT_LE(p.tau, 1.0);
    }
  }
}

TEST(Transmission, AmplitudeInvariance) {
  const GridSpec g = GridSpec::square(10);
  const MaterialCatalog cat;
  Field x = Field::Constant(g.num_elements(), 0.4);
  apply_plate_mask(x, g);
  const ReducedSystem sys = ReducedAssembler(g, cat.nu).assemble(x, cat);
  IncidentWave w1{1500.0, 0.0, {1.0, 0.0}}, w2{1500.0, 0.0, {2.0, -1.0}};
  const double t1 = solve_transmission(sys, w1, cat).tau, t2 = solve_transmission(sys, w2, cat).tau;
  EXPECT_NEAR(t1, t2, 1e-12 * t1);
}

TEST(Transmission, NormalIncidenceHasZeroWavenumber) {
  const IncidentWave w{1000.0, 0.0};
  EXPECT_EQ(w.kx(340.0), 0.0);
  EXPECT_NEAR(w.ky(340.0), 2 * std::numbers::pi * 1000.0 / 340.0, 1e-12);
}

TEST(Transmission, WavenumberMismatchRejected) {
  const GridSpec g = GridSpec::square(8);
  const MaterialCatalog cat;
  const ReducedSystem sys = ReducedAssembler(g, cat.nu, 0.0).assemble(Field::Ones(g.num_elements()), cat);
  EXPECT_THROW(solve_transmission(sys, IncidentWave{1000.0, 0.3}, cat), StateError);
}
