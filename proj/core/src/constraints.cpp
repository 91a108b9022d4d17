#include "stlopt/constraints.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "stlopt/errors.hpp"
#include "stlopt/fem.hpp"

namespace stlopt {

VolumeResult volume_constraint(const Field& xi_d2, double volume_fraction) {
  if (!(volume_fraction > 0.0 && volume_fraction <= 1.0)) throw InvalidParameter("volume fraction must lie in (0,1]");
  if (xi_d2.size() == 0) throw DimensionError("empty field");
  VolumeResult r;
  const double n = static_cast<double>(xi_d2.size());
  r.value = xi_d2.sum() / (n * volume_fraction) - 1.0;
  r.gradient = Field::Constant(xi_d2.size(), 1.0 / (n * volume_fraction));
  return r;
}

struct SelfWeightAnalysis::Solution {
  Eigen::VectorXd u;
  Eigen::VectorXd f;
  double theta = 0.0;
};

SelfWeightAnalysis::SelfWeightAnalysis(const GridSpec& grid, const MaterialCatalog& cat) : grid_(grid), cat_(cat) {
  grid.validate();
  cat.validate();
  const double h = grid.element_size;
  Ks_ = reference_element_matrices(0.5 * h, 0.5 * h, cat.nu).Ks;
  // master nodes: ix in [0, nx), iy in [1, ny]; the lower row is clamped
  auto free_index = [&](int ix, int iy, int c) {
    if (iy == 0) return -1;
    return 2 * ((iy - 1) * grid.nx + (ix % grid.nx)) + c;
  };
  n_free_ = 2 * grid.nx * grid.ny;
  dofs_.resize(grid.num_elements());
  for (int e = 0; e < grid.num_elements(); ++e) {
    const int ix = grid.element_ix(e);
    const int iy = grid.element_iy(e);
    const int cx[4] = {ix, ix + 1, ix + 1, ix};
    const int cy[4] = {iy, iy, iy + 1, iy + 1};
    for (int i = 0; i < 4; ++i) {
      dofs_[e][2 * i] = free_index(cx[i], cy[i], 0);
      dofs_[e][2 * i + 1] = free_index(cx[i], cy[i], 1);
    }
  }
  const Field ones = Field::Ones(grid.num_elements());
  theta_hat_ = solve(ones, ones).theta;
}

SelfWeightAnalysis::Solution SelfWeightAnalysis::solve(const Field& xi_b, const Field& xi_e2) const {
  const int ne = grid_.num_elements();
  if (xi_b.size() != ne || xi_e2.size() != ne) throw DimensionError("field length mismatch in self-weight analysis");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(ne) * 64);
  Solution s;
  s.f = Eigen::VectorXd::Zero(n_free_);
  const double quarter_area = 0.25 * grid_.element_size * grid_.element_size;
  for (int e = 0; e < ne; ++e) {
    const double E = interpolate_element(xi_e2[e], cat_).E_e.real();
    if (!(xi_b[e] >= 0.0 && xi_b[e] <= 1.0)) throw DomainError("physical density outside [0,1]");
    const auto& d = dofs_[e];
    for (int j = 0; j < 8; ++j) {
      if (d[j] < 0) continue;
      for (int i = 0; i < 8; ++i) {
        if (d[i] < 0) continue;
        t.emplace_back(d[i], d[j], E * Ks_(i, j));
      }
    }
    for (int i = 0; i < 4; ++i) {
      if (d[2 * i + 1] >= 0) s.f[d[2 * i + 1]] -= xi_b[e] * quarter_area;
    }
  }
  Eigen::SparseMatrix<double> K(n_free_, n_free_);
  K.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  ++factorizations_;
  if (ldlt.info() != Eigen::Success) throw ConfigError("singular static stiffness in self-weight analysis");
  s.u = ldlt.solve(s.f);
  s.theta = s.u.dot(s.f);
  return s;
}

double SelfWeightAnalysis::compliance(const Field& xi_b, const Field& xi_e2) const {
  return solve(xi_b, xi_e2).theta;
}

SelfWeightResult SelfWeightAnalysis::evaluate(const Field& xi_b, const Field& xi_e2, bool with_gradient) const {
  const Solution s = solve(xi_b, xi_e2);
  SelfWeightResult r;
  r.theta = s.theta;
  r.theta_hat = theta_hat_;
  const double scale = 1.0 / (kSelfWeightRatio * theta_hat_);
  r.J_conn = s.theta * scale - 1.0;
  if (!with_gradient) return r;
  const int ne = grid_.num_elements();
  r.dJ_dxi_b = Field::Zero(ne);
  r.dJ_dxi_e2 = Field::Zero(ne);
  const double quarter_area = 0.25 * grid_.element_size * grid_.element_size;
  Eigen::Matrix<double, 8, 1> ue;
  for (int e = 0; e < ne; ++e) {
    const auto& d = dofs_[e];
    for (int i = 0; i < 8; ++i) ue[i] = d[i] < 0 ? 0.0 : s.u[d[i]];
    // theta = F^T K^-1 F: d theta = 2 u^T dF - u^T dK u
    double load = 0.0;
    for (int i = 0; i < 4; ++i) load -= quarter_area * ue[2 * i + 1];
    r.dJ_dxi_b[e] = 2.0 * load * scale;
    const double dE = interpolate_derivative(xi_e2[e], cat_).E_e.real();
    r.dJ_dxi_e2[e] = -dE * ue.dot(Ks_ * ue) * scale;
  }
  return r;
}

double connectivity_lower_bound(double J_conn, double J_min) {
  if (!(J_min > -1.0 && J_min <= 0.0)) throw InvalidParameter("connectivity lower bound must lie in (-1, 0]");
  return J_min - J_conn;
}

double adaptive_connectivity_bound(double J_conn, std::optional<double> previous, double step) {
  if (!(step > 0.0)) throw InvalidParameter("bound step must be positive");
  // the guard keeps exact multiples from being treated as admissible
  const double ratio = -J_conn / step;
  const int n = std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)) - 1);
  double bound = -step * n;
  if (bound <= -1.0) bound = -step * std::floor((1.0 - 1e-9) / step);
  if (previous) bound = std::max(bound, *previous);
  return bound;
}

}  // namespace stlopt
