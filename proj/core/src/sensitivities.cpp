#include "stlopt/sensitivities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stlopt/errors.hpp"

namespace stlopt {

BandAnalysis::BandAnalysis(const GridSpec& grid, const MaterialCatalog& cat, const FrequencyBand& band, double theta)
    : grid_(grid),
      cat_(cat),
      band_(band),
      theta_(theta),
      assembler_(grid, cat.nu, 0.0) {
  cat.validate();
  band.validate();
  if (theta != 0.0) {
    // tangential wavenumber varies with frequency; only a single sample is supported
    if (band.n_samples != 1) throw InvalidParameter("oblique incidence needs a single-sample band");
    const IncidentWave w{band.samples()[0], theta};
    assembler_ = ReducedAssembler(grid, cat.nu, w.kx(cat.c_halfspace));
  }
}

void BandAnalysis::set_band(const FrequencyBand& band) {
  band.validate();
  if (theta_ != 0.0) throw StateError("band of an oblique analysis is fixed");
  band_ = band;
}

BandEvaluation BandAnalysis::evaluate(const Field& density, bool with_gradient, DesignTag tag) const {
  const ReducedSystem sys = assembler_.assemble(density, cat_);
  const auto freqs = band_.samples();
  const auto weights = band_.weights();
  BandEvaluation out;
  out.spectrum.tag = tag;
  std::vector<double> stl;
  if (with_gradient) out.gradient = Field::Zero(density.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const IncidentWave wave{freqs[i], theta_};
    const TransmissionResult r = solve_transmission(sys, wave, cat_, with_gradient);
    const double s = compute_stl(r.tau);
    stl.push_back(s);
    out.spectrum.samples.push_back({freqs[i], r.tau, s});
    if (with_gradient) {
      out.gradient += (weights[i] / band_.width()) * adjoint_stl_gradient(assembler_, density, cat_, r);
    }
  }
  out.spectrum.band_average = band_average(stl, band_);
  return out;
}

Field adjoint_stl_gradient(const ReducedAssembler& assembler, const Field& density, const MaterialCatalog& cat,
                           const TransmissionResult& forward) {
  if (!forward.factorization) throw StateError("forward solution was computed without a factorization");
  const GridSpec& grid = assembler.grid();
  if (density.size() != grid.num_elements()) throw DimensionError("density field length mismatch");
  if (forward.response.size() != assembler.layout().size()) throw DimensionError("response length mismatch");
  const double lx = grid.lx();
  // P_t = t^T q with t the reduced upper trace weights
  const VectorC t = assembler.h_top() / lx;
  const VectorC lambda = forward.factorization->solve_transposed(t);
  const VectorC& q = forward.response;
  const Complex Pt = forward.transmitted;
  const double w = forward.wave.omega();
  const double w2 = w * w;
  const ElementMatrices& em = assembler.element();
  Field grad(density.size());
  Eigen::Matrix<Complex, 8, 1> au, bu;
  Eigen::Matrix<Complex, 4, 1> ap, bp;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const auto& dofs = assembler.element_dofs(e);
    const auto& ph = assembler.element_phases(e);
    for (int i = 0; i < 8; ++i) {
      au[i] = lambda[dofs[i]] * std::conj(ph[i]);
      bu[i] = q[dofs[i]] * ph[i];
    }
    for (int i = 0; i < 4; ++i) {
      ap[i] = lambda[dofs[8 + i]] * std::conj(ph[8 + i]);
      bp[i] = q[dofs[8 + i]] * ph[8 + i];
    }
    const ElementProps d = interpolate_derivative(density[e], cat);
    const Complex uu_k = (au.transpose() * em.Ks.cast<Complex>() * bu)(0);
    const Complex uu_m = (au.transpose() * em.Ms.cast<Complex>() * bu)(0);
    const Complex pp_k = (ap.transpose() * em.Ka.cast<Complex>() * bp)(0);
    const Complex pp_m = (ap.transpose() * em.Ma.cast<Complex>() * bp)(0);
    const Complex up = (au.transpose() * em.S.cast<Complex>() * bp)(0);
    const Complex pu = (ap.transpose() * em.S.transpose().cast<Complex>() * bu)(0);
    const Complex dA = d.E_e * uu_k - w2 * d.rho_s_e * uu_m + d.inv_rho_a_e * pp_k - w2 * d.inv_kappa_e * pp_m -
                       up - w2 * pu;
    const Complex dPt = -dA;
    const double dtau = 2.0 * std::real(std::conj(Pt) * dPt) / std::norm(forward.wave.amplitude);
    grad[e] = -10.0 / std::log(10.0) * dtau / forward.tau;
  }
  return grad;
}

FdReport fd_check(const std::function<double(const Field&)>& functional, const Field& xi, const Field& gradient,
                  int n_probes, double step, std::uint64_t seed, const GridSpec* grid, double floor) {
  if (!(step > 0.0)) throw InvalidParameter("finite-difference step must be positive");
  if (gradient.size() != xi.size()) throw DimensionError("gradient length mismatch");
  std::vector<int> candidates;
  for (int i = 0; i < xi.size(); ++i) {
    if (grid == nullptr || !grid->is_fixed(i)) candidates.push_back(i);
  }
  if (candidates.empty()) throw InvalidParameter("no free components to probe");
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const int n = std::min<int>(n_probes, static_cast<int>(candidates.size()));
  FdReport rep;
  for (int k = 0; k < n; ++k) {
    const int i = candidates[k];
    Field xp = xi, xm = xi;
    xp[i] += step;
    xm[i] -= step;
    const double fd = (functional(xp) - functional(xm)) / (2.0 * step);
    const double adj = gradient[i];
    const double scale = std::max({std::abs(fd), std::abs(adj), floor});
    rep.max_rel_error = std::max(rep.max_rel_error, std::abs(fd - adj) / scale);
    rep.probes.push_back(i);
    rep.adjoint.push_back(adj);
    rep.finite_difference.push_back(fd);
  }
  return rep;
}

}  // namespace stlopt
