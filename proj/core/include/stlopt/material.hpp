#pragma once

#include <complex>

namespace stlopt {

using Complex = std::complex<double>;

/// Solid and fluid constants plus the artificial properties that keep the
/// interpolated system regular in void and solid regions.
struct MaterialCatalog {
  Complex E{4.85e9, 4.85e9 * 0.05};  ///< Young's modulus [Pa]
  double rho_s = 1188.35;             ///< solid density [kg/m^3]
  double nu = 0.31;
  double rho_a = 1.225;               ///< fluid density [kg/m^3]
  Complex c_a{340.0, 340.0 * 2e-4};   ///< speed of sound in the core [m/s]
  double c_halfspace = 340.0;         ///< speed of sound in the surrounding air [m/s]
  double q = 8.0;                     ///< RAMP penalization
  Complex E_v{4.85e3, 0.0};           ///< void stiffness
  double rho_v = 1188.35e-6;          ///< void density
  Complex kappa_r{0.0, 0.0};          ///< fluid bulk modulus inside solid (0: derive)
  double rho_r = 1.225e6;             ///< fluid density inside solid

  Complex kappa() const { return rho_a * c_a * c_a; }
  /// Artificial bulk modulus, 1e6 * kappa unless set explicitly.
  Complex kappa_solid() const { return kappa_r == Complex{} ? 1e6 * kappa() : kappa_r; }
  /// Characteristic impedance of the halfspaces.
  double halfspace_impedance() const { return rho_a * c_halfspace; }

  void validate() const;
  bool operator==(const MaterialCatalog&) const = default;

  /// PMMA core in air with ratio-based artificial properties.
  static MaterialCatalog pmma_air();
};

/// Interpolated properties of one element.
struct ElementProps {
  Complex E_e;
  double rho_s_e = 0.0;
  Complex inv_kappa_e;
  Complex inv_rho_a_e;
  double xi_p = 0.0;
};

/// RAMP factor xi / (1 + q (1 - xi)) and its derivative.
double ramp(double xi, double q);
double ramp_derivative(double xi, double q);

ElementProps interpolate_element(double xi_p, const MaterialCatalog& cat);
/// Derivative of every interpolated property with respect to xi_p; the
/// xi_p member of the result holds the evaluation point.
ElementProps interpolate_derivative(double xi_p, const MaterialCatalog& cat);

}  // namespace stlopt
