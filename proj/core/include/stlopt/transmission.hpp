#pragma once

#include <memory>
#include <vector>

#include "stlopt/design_field.hpp"
#include "stlopt/fem.hpp"
#include "stlopt/material.hpp"
#include "stlopt/sparse_lu.hpp"

namespace stlopt {

/// Normalization constant of the STL objective [dB].
inline constexpr double kStlNormalization = 120.0;

/// Frequency band sampled with the midpoint rule.
struct FrequencyBand {
  double f_minus = 2000.0;  ///< [Hz]
  double f_plus = 2500.0;   ///< [Hz]
  int n_samples = 5;

  void validate() const;
  double width() const { return f_plus - f_minus; }
  /// Sample frequencies in Hz, at the midpoints of equal subintervals.
  std::vector<double> samples() const;
  /// Integration weights in Hz; they sum to the band width.
  std::vector<double> weights() const;
  /// Band translated by `shift` Hz.
  FrequencyBand shifted(double shift) const;

  bool operator==(const FrequencyBand&) const = default;
};

/// Forward solution at one frequency.
struct TransmissionResult {
  IncidentWave wave;
  VectorC response;
  Complex transmitted;  ///< P_t
  double tau = 0.0;
  std::shared_ptr<const SparseLU> factorization;
};

/// Solves the halfspace-loaded unit cell and extracts the transmitted
/// plane-wave amplitude from the upper boundary trace.
///
/// Throws ResonanceSingular carrying the frequency if A(w) is singular.
TransmissionResult solve_transmission(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat,
                                      bool keep_factorization = false);

/// -10 log10(tau); throws DomainError for tau <= 0.
double compute_stl(double tau);

struct SpectrumSample {
  double frequency_hz = 0.0;
  double tau = 0.0;
  double stl_db = 0.0;
};

struct SpectrumResult {
  std::vector<SpectrumSample> samples;
  double band_average = 0.0;
  DesignTag tag = DesignTag::blueprint;
};

/// Weighted mean of the per-sample STL values of `band`.
double band_average(const std::vector<double>& stl, const FrequencyBand& band);
/// 1 - STL / 120.
double normalized_objective(double stl_band);

/// Normal-incidence limp-panel STL; m is the surface density [kg/m^2].
double mass_law(double surface_density, double frequency_hz, double theta, double rho_a = 1.225, double c_a = 340.0);
/// Band average of mass_law at the band samples.
double mass_law_band(double surface_density, const FrequencyBand& band, double theta = 0.0, double rho_a = 1.225,
                     double c_a = 340.0);

/// Two masses per unit area joined by a massless spring of stiffness k
/// [N/m^3], fluid-loaded on both sides.
double mass_spring_mass_stl(double m1, double m2, double k, double frequency_hz, double rho_a = 1.225,
                            double c_a = 340.0);
/// Decoupling frequency sqrt(k (m1 + m2) / (m1 m2)) / (2 pi).
double decoupling_frequency(double m1, double m2, double k);
/// Spring stiffness giving decoupling frequency f_d.
double spring_for_decoupling(double m1, double m2, double f_d);

/// Surface density of the equal-mass single plate at volume fraction v.
double equal_mass_surface_density(const GridSpec& grid, const MaterialCatalog& cat, double volume_fraction = 0.5);

/// Spectrum of a single physical field over arbitrary frequencies.
SpectrumResult analyze_spectrum(const Field& density, const GridSpec& grid, const MaterialCatalog& cat,
                                const std::vector<double>& frequencies_hz, double theta = 0.0);

}  // namespace stlopt
