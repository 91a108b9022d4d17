#include "stlopt/material.hpp"

#include <cmath>

#include "stlopt/errors.hpp"

namespace stlopt {

void MaterialCatalog::validate() const {
  if (!(E.real() > 0.0)) throw InvalidParameter("Young's modulus must have positive real part");
  if (!(nu > 0.0 && nu < 0.5)) throw InvalidParameter("Poisson ratio must lie in (0, 0.5)");
  if (!(rho_s > 0.0) || !(rho_a > 0.0)) throw InvalidParameter("densities must be positive");
  if (!(c_a.real() > 0.0) || !(c_halfspace > 0.0)) throw InvalidParameter("speed of sound must be positive");
  if (!(q >= 0.0)) throw InvalidParameter("RAMP penalization must be nonnegative");
  if (!(E_v.real() > 0.0 && E_v.real() < E.real())) throw InvalidParameter("void stiffness must be in (0, E)");
  if (!(rho_v > 0.0 && rho_v < rho_s)) throw InvalidParameter("void density must be in (0, rho_s)");
  if (!(rho_r > 0.0)) throw InvalidParameter("artificial fluid density must be positive");
}

MaterialCatalog MaterialCatalog::pmma_air() { return MaterialCatalog{}; }

double ramp(double xi, double q) { return xi / (1.0 + q * (1.0 - xi)); }

double ramp_derivative(double xi, double q) {
  const double den = 1.0 + q * (1.0 - xi);
  return (1.0 + q) / (den * den);
}

namespace {

void check_density(double xi_p) {
  if (!(xi_p >= 0.0 && xi_p <= 1.0)) throw DomainError("physical density outside [0,1]");
}

}  // namespace

ElementProps interpolate_element(double xi_p, const MaterialCatalog& cat) {
  check_density(xi_p);
  const double r = ramp(xi_p, cat.q);
  const Complex inv_kappa = 1.0 / cat.kappa();
  const Complex inv_kappa_r = 1.0 / cat.kappa_solid();
  ElementProps p;
  p.xi_p = xi_p;
  p.E_e = cat.E_v + r * (cat.E - cat.E_v);
  p.rho_s_e = cat.rho_v + xi_p * (cat.rho_s - cat.rho_v);
  p.inv_kappa_e = (1.0 - xi_p) * inv_kappa + xi_p * inv_kappa_r;
  p.inv_rho_a_e = (1.0 - r) / cat.rho_a + r / cat.rho_r;
  return p;
}

ElementProps interpolate_derivative(double xi_p, const MaterialCatalog& cat) {
  check_density(xi_p);
  const double dr = ramp_derivative(xi_p, cat.q);
  ElementProps p;
  p.xi_p = xi_p;
  p.E_e = dr * (cat.E - cat.E_v);
  p.rho_s_e = cat.rho_s - cat.rho_v;
  p.inv_kappa_e = 1.0 / cat.kappa_solid() - 1.0 / cat.kappa();
  p.inv_rho_a_e = dr * (1.0 / cat.rho_r - 1.0 / cat.rho_a);
  return p;
}

}  // namespace stlopt
