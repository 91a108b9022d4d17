#include "stlopt/transmission.hpp"

#include <cmath>
#include <numeric>

#include "stlopt/errors.hpp"

namespace stlopt {

void FrequencyBand::validate() const {
  if (!(f_minus > 0.0) || !(f_plus > f_minus)) throw InvalidParameter("band must satisfy 0 < f_minus < f_plus");
  if (n_samples < 1) throw InvalidParameter("band needs at least one sample");
}

std::vector<double> FrequencyBand::samples() const {
  validate();
  std::vector<double> f(n_samples);
  const double step = width() / n_samples;
  for (int i = 0; i < n_samples; ++i) f[i] = f_minus + (i + 0.5) * step;
  return f;
}

std::vector<double> FrequencyBand::weights() const {
  validate();
  return std::vector<double>(n_samples, width() / n_samples);
}

FrequencyBand FrequencyBand::shifted(double shift) const {
  FrequencyBand b = *this;
  b.f_minus += shift;
  b.f_plus += shift;
  b.validate();
  return b;
}

TransmissionResult solve_transmission(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat,
                                      bool keep_factorization) {
  if (wave.amplitude == Complex{}) throw InvalidParameter("incident amplitude must be nonzero");
  const SparseMatrixC A = dynamic_matrix(sys, wave, cat);
  const VectorC rhs = excitation(sys, wave, cat);
  std::shared_ptr<SparseLU> lu;
  try {
    lu = std::make_shared<SparseLU>(A);
  } catch (const ResonanceSingular&) {
    throw ResonanceSingular("singular dynamic matrix at " + std::to_string(wave.frequency_hz) + " Hz",
                            wave.frequency_hz);
  }
  TransmissionResult r;
  r.wave = wave;
  r.response = lu->solve(rhs);
  r.transmitted = (sys.h_top.transpose() * r.response)(0) / sys.lx;
  r.tau = std::norm(r.transmitted / wave.amplitude);
  if (keep_factorization) r.factorization = std::move(lu);
  return r;
}

double compute_stl(double tau) {
  if (!(tau > 0.0)) throw DomainError("transmission coefficient must be positive");
  return -10.0 * std::log10(tau);
}

double band_average(const std::vector<double>& stl, const FrequencyBand& band) {
  if (stl.empty()) throw InvalidParameter("band average needs at least one sample");
  const auto w = band.weights();
  if (w.size() != stl.size()) throw DimensionError("sample count does not match the band");
  double s = 0.0;
  for (std::size_t i = 0; i < stl.size(); ++i) s += w[i] * stl[i];
  return s / band.width();
}

double normalized_objective(double stl_band) { return 1.0 - stl_band / kStlNormalization; }

double mass_law(double surface_density, double frequency_hz, double theta, double rho_a, double c_a) {
  if (!(surface_density > 0.0) || !(frequency_hz >= 0.0) || !(rho_a > 0.0) || !(c_a > 0.0)) {
    throw InvalidParameter("mass law needs positive parameters");
  }
  const double x = 2.0 * M_PI * frequency_hz * surface_density * std::cos(theta) / (2.0 * rho_a * c_a);
  return 10.0 * std::log10(1.0 + x * x);
}

double mass_law_band(double surface_density, const FrequencyBand& band, double theta, double rho_a, double c_a) {
  std::vector<double> stl;
  for (double f : band.samples()) stl.push_back(mass_law(surface_density, f, theta, rho_a, c_a));
  return band_average(stl, band);
}

double mass_spring_mass_stl(double m1, double m2, double k, double frequency_hz, double rho_a, double c_a) {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(k > 0.0) || !(frequency_hz > 0.0)) {
    throw InvalidParameter("mass-spring-mass oracle needs positive parameters");
  }
  const double w = 2.0 * M_PI * frequency_hz;
  const Complex iwz(0.0, w * rho_a * c_a);
  // [a11 a12; a21 a22] (w1, w2) = (2, 0) for unit incident pressure
  const Complex a11 = -w * w * m1 + k + iwz;
  const Complex a22 = -w * w * m2 + k + iwz;
  const Complex a12 = -k;
  const Complex det = a11 * a22 - a12 * a12;
  const Complex w2 = -a12 * 2.0 / det;
  return compute_stl(std::norm(iwz * w2));
}

double decoupling_frequency(double m1, double m2, double k) {
  return std::sqrt(k * (m1 + m2) / (m1 * m2)) / (2.0 * M_PI);
}

double spring_for_decoupling(double m1, double m2, double f_d) {
  const double w = 2.0 * M_PI * f_d;
  return w * w * m1 * m2 / (m1 + m2);
}

double equal_mass_surface_density(const GridSpec& grid, const MaterialCatalog& cat, double volume_fraction) {
  return cat.rho_s * volume_fraction * grid.ly();
}

SpectrumResult analyze_spectrum(const Field& density, const GridSpec& grid, const MaterialCatalog& cat,
                                const std::vector<double>& frequencies_hz, double theta) {
  SpectrumResult out;
  if (theta == 0.0) {
    const ReducedAssembler assembler(grid, cat.nu, 0.0);
    const ReducedSystem sys = assembler.assemble(density, cat);
    for (double f : frequencies_hz) {
      const auto r = solve_transmission(sys, IncidentWave{f, 0.0}, cat);
      out.samples.push_back({f, r.tau, compute_stl(r.tau)});
    }
  } else {
    for (double f : frequencies_hz) {
      const IncidentWave wave{f, theta};
      const ReducedAssembler assembler(grid, cat.nu, wave.kx(cat.c_halfspace));
      const auto r = solve_transmission(assembler.assemble(density, cat), wave, cat);
      out.samples.push_back({f, r.tau, compute_stl(r.tau)});
    }
  }
  if (!out.samples.empty()) {
    double s = 0.0;
    for (const auto& x : out.samples) s += x.stl_db;
    out.band_average = s / static_cast<double>(out.samples.size());
  }
  return out;
}

}  // namespace stlopt
