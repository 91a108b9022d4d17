#include "stlopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stlopt/errors.hpp"

namespace stlopt {

namespace {

constexpr double kXiNode[4] = {-1.0, 1.0, 1.0, -1.0};
constexpr double kEtaNode[4] = {-1.0, -1.0, 1.0, 1.0};

void shape(double xi, double eta, double N[4]) {
  for (int i = 0; i < 4; ++i) N[i] = 0.25 * (1.0 + xi * kXiNode[i]) * (1.0 + eta * kEtaNode[i]);
}

Eigen::Matrix<double, 2, 8> shape_u(const double N[4]) {
  Eigen::Matrix<double, 2, 8> Nu = Eigen::Matrix<double, 2, 8>::Zero();
  for (int i = 0; i < 4; ++i) {
    Nu(0, 2 * i) = N[i];
    Nu(1, 2 * i + 1) = N[i];
  }
  return Nu;
}

Eigen::RowVector4d shape_p(const double N[4]) { return Eigen::RowVector4d(N[0], N[1], N[2], N[3]); }

// Edge integral of -N_u^T n N_p with 2-point Gauss; `fixed` is the fixed
// natural coordinate value, `along_xi` selects which coordinate varies.
Matrix84d edge_coupling(bool along_xi, double fixed, double half_len, double nx, double ny) {
  const double g = 1.0 / std::sqrt(3.0);
  Matrix84d out = Matrix84d::Zero();
  for (double s : {-g, g}) {
    double N[4];
    if (along_xi) {
      shape(s, fixed, N);
    } else {
      shape(fixed, s, N);
    }
    const auto Nu = shape_u(N);
    const Eigen::Vector2d n(nx, ny);
    out -= half_len * (Nu.transpose() * n) * shape_p(N);
  }
  return out;
}

void check_field(const Field& density, const GridSpec& grid) {
  if (density.size() != grid.num_elements()) throw DimensionError("density field length mismatch");
  for (Eigen::Index e = 0; e < density.size(); ++e) {
    if (!(density[e] >= 0.0 && density[e] <= 1.0)) throw DomainError("physical density outside [0,1]");
  }
}

// Gauss-Legendre nodes on [-1, 1].
constexpr double kG4x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kG4w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

// h_j of a horizontal node row: integral of N_j(x) exp(i kx x).
std::vector<Complex> row_trace(const GridSpec& grid, double kx) {
  std::vector<Complex> h(grid.nx + 1, Complex{});
  const double w = grid.element_size;
  for (int ix = 0; ix < grid.nx; ++ix) {
    const double x0 = ix * w;
    for (int k = 0; k < 4; ++k) {
      const double s = 0.5 * (kG4x[k] + 1.0);
      const Complex ph = std::exp(Complex(0.0, kx * (x0 + s * w)));
      h[ix] += 0.5 * w * kG4w[k] * (1.0 - s) * ph;
      h[ix + 1] += 0.5 * w * kG4w[k] * s * ph;
    }
  }
  return h;
}

struct ElementBlocks {
  Eigen::Matrix<Complex, 12, 12> K;
  Eigen::Matrix<Complex, 12, 12> M;
};

// Local 12x12 blocks ordered (8 structural, 4 pressure).
ElementBlocks element_blocks(const ElementMatrices& em, const ElementProps& p) {
  ElementBlocks b;
  b.K.setZero();
  b.M.setZero();
  b.K.topLeftCorner<8, 8>() = p.E_e * em.Ks.cast<Complex>();
  b.M.topLeftCorner<8, 8>() = p.rho_s_e * em.Ms.cast<Complex>();
  b.K.bottomRightCorner<4, 4>() = p.inv_rho_a_e * em.Ka.cast<Complex>();
  b.M.bottomRightCorner<4, 4>() = p.inv_kappa_e * em.Ma.cast<Complex>();
  b.K.topRightCorner<8, 4>() = -p.xi_p * em.S.cast<Complex>();
  b.M.bottomLeftCorner<4, 8>() = p.xi_p * em.S.transpose().cast<Complex>();
  return b;
}

std::array<int, 12> full_element_dofs(const GridSpec& grid, const DofLayout& layout, int e) {
  const auto nodes = element_nodes(grid, e);
  std::array<int, 12> d{};
  for (int i = 0; i < 4; ++i) {
    d[2 * i] = layout.ux(nodes[i]);
    d[2 * i + 1] = layout.uy(nodes[i]);
    d[8 + i] = layout.p(nodes[i]);
  }
  return d;
}

}  // namespace

ElementMatrices reference_element_matrices(double a, double b, double nu) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameter("element dimensions must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw InvalidParameter("Poisson ratio must lie in (-1, 0.5)");
  ElementMatrices em;
  em.Ks.setZero();
  em.Ms.setZero();
  em.Ka.setZero();
  em.Ma.setZero();
  Eigen::Matrix3d D;
  const double f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
  D << 1.0 - nu, nu, 0.0, nu, 1.0 - nu, 0.0, 0.0, 0.0, 0.5 - nu;
  D *= f;
  const double g = 1.0 / std::sqrt(3.0);
  const double detJ = a * b;
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      double N[4];
      shape(xi, eta, N);
      Eigen::Matrix<double, 2, 4> dN;
      for (int i = 0; i < 4; ++i) {
        dN(0, i) = 0.25 * kXiNode[i] * (1.0 + eta * kEtaNode[i]) / a;
        dN(1, i) = 0.25 * kEtaNode[i] * (1.0 + xi * kXiNode[i]) / b;
      }
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int i = 0; i < 4; ++i) {
        B(0, 2 * i) = dN(0, i);
        B(1, 2 * i + 1) = dN(1, i);
        B(2, 2 * i) = dN(1, i);
        B(2, 2 * i + 1) = dN(0, i);
      }
      const auto Nu = shape_u(N);
      const auto Np = shape_p(N);
      em.Ks += detJ * B.transpose() * D * B;
      em.Ms += detJ * Nu.transpose() * Nu;
      em.Ka += detJ * dN.transpose() * dN;
      em.Ma += detJ * Np.transpose() * Np;
    }
  }
  em.S_bottom = edge_coupling(true, -1.0, a, 0.0, -1.0);
  em.S_top = edge_coupling(true, 1.0, a, 0.0, 1.0);
  em.S = em.S_bottom + em.S_top + edge_coupling(false, 1.0, b, 1.0, 0.0) +
         edge_coupling(false, -1.0, b, -1.0, 0.0);
  return em;
}

std::array<int, 4> element_nodes(const GridSpec& grid, int e) {
  const int ix = grid.element_ix(e);
  const int iy = grid.element_iy(e);
  return {grid.node_index(ix, iy), grid.node_index(ix + 1, iy), grid.node_index(ix + 1, iy + 1),
          grid.node_index(ix, iy + 1)};
}

AssembledSystem assemble(const Field& density, const MaterialCatalog& cat, const GridSpec& grid, double kx) {
  grid.validate();
  cat.validate();
  check_field(density, grid);
  const double h = grid.element_size;
  const ElementMatrices em = reference_element_matrices(0.5 * h, 0.5 * h, cat.nu);
  AssembledSystem sys;
  sys.layout.num_nodes = grid.num_nodes();
  sys.lx = grid.lx();
  const int n = sys.layout.size();
  std::vector<Eigen::Triplet<Complex>> kt, mt;
  kt.reserve(static_cast<std::size_t>(grid.num_elements()) * 112);
  mt.reserve(static_cast<std::size_t>(grid.num_elements()) * 112);
  for (int e = 0; e < grid.num_elements(); ++e) {
    const auto blocks = element_blocks(em, interpolate_element(density[e], cat));
    const auto dofs = full_element_dofs(grid, sys.layout, e);
    for (int j = 0; j < 12; ++j) {
      for (int i = 0; i < 12; ++i) {
        if (blocks.K(i, j) != Complex{}) kt.emplace_back(dofs[i], dofs[j], blocks.K(i, j));
        if (blocks.M(i, j) != Complex{}) mt.emplace_back(dofs[i], dofs[j], blocks.M(i, j));
      }
    }
  }
  sys.K.resize(n, n);
  sys.M.resize(n, n);
  sys.K.setFromTriplets(kt.begin(), kt.end());
  sys.M.setFromTriplets(mt.begin(), mt.end());
  sys.K.makeCompressed();
  sys.M.makeCompressed();

  const auto row = row_trace(grid, kx);
  sys.traces.kx = kx;
  sys.traces.h_bottom = VectorC::Zero(n);
  sys.traces.h_top = VectorC::Zero(n);
  for (int ix = 0; ix <= grid.nx; ++ix) {
    sys.traces.h_bottom[sys.layout.p(grid.node_index(ix, 0))] = row[ix];
    sys.traces.h_top[sys.layout.p(grid.node_index(ix, grid.ny))] = row[ix];
  }
  return sys;
}

BlochOperator make_bloch_operator(const GridSpec& grid, double kx) {
  grid.validate();
  BlochOperator op;
  op.lambda_x = std::exp(Complex(0.0, -kx * grid.lx()));
  op.num_master_nodes = grid.nx * (grid.ny + 1);
  op.master_of.resize(grid.num_nodes());
  op.phase_of.resize(grid.num_nodes());
  for (int iy = 0; iy <= grid.ny; ++iy) {
    for (int ix = 0; ix <= grid.nx; ++ix) {
      const int node = grid.node_index(ix, iy);
      op.master_of[node] = iy * grid.nx + (ix % grid.nx);
      op.phase_of[node] = ix == grid.nx ? op.lambda_x : Complex(1.0, 0.0);
    }
  }
  DofLayout full{grid.num_nodes()};
  DofLayout red{op.num_master_nodes};
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(full.size()));
  for (int node = 0; node < grid.num_nodes(); ++node) {
    const int m = op.master_of[node];
    const Complex ph = op.phase_of[node];
    t.emplace_back(full.ux(node), red.ux(m), ph);
    t.emplace_back(full.uy(node), red.uy(m), ph);
    t.emplace_back(full.p(node), red.p(m), ph);
  }
  op.Lambda.resize(full.size(), red.size());
  op.Lambda.setFromTriplets(t.begin(), t.end());
  op.Lambda.makeCompressed();
  return op;
}

ReducedSystem bloch_reduce(const AssembledSystem& sys, double kx, const GridSpec& grid) {
  if (sys.layout.num_nodes != grid.num_nodes()) throw DimensionError("system does not match the grid");
  if (std::abs(sys.traces.kx - kx) > 1e-12 * (1.0 + std::abs(kx))) {
    throw StateError("traces were built for a different wavenumber");
  }
  const BlochOperator op = make_bloch_operator(grid, kx);
  const SparseMatrixC LH = op.Lambda.adjoint();
  ReducedSystem r;
  r.K = LH * sys.K * op.Lambda;
  r.M = LH * sys.M * op.Lambda;
  r.K.makeCompressed();
  r.M.makeCompressed();
  r.g_bottom = LH * sys.traces.h_bottom.conjugate();
  r.g_top = LH * sys.traces.h_top.conjugate();
  r.h_bottom = op.Lambda.transpose() * sys.traces.h_bottom;
  r.h_top = op.Lambda.transpose() * sys.traces.h_top;
  r.layout.num_nodes = op.num_master_nodes;
  r.lambda_x = op.lambda_x;
  r.kx = kx;
  r.lx = sys.lx;
  return r;
}

double IncidentWave::omega() const { return 2.0 * M_PI * frequency_hz; }
double IncidentWave::kx(double c) const { return omega() * std::sin(theta) / c; }
double IncidentWave::ky(double c) const { return omega() * std::cos(theta) / c; }

namespace {

void check_wave(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat) {
  if (!(wave.frequency_hz > 0.0)) throw InvalidParameter("frequency must be positive");
  if (!(std::abs(wave.theta) < 0.5 * M_PI)) throw InvalidParameter("incidence angle must lie in (-pi/2, pi/2)");
  const double kx = wave.kx(cat.c_halfspace);
  if (std::abs(kx - sys.kx) > 1e-9 * (1.0 + std::abs(kx))) {
    throw StateError("system was reduced for a different tangential wavenumber");
  }
}

void add_rank_one(std::vector<Eigen::Triplet<Complex>>& t, const VectorC& g, const VectorC& h, Complex coef) {
  std::vector<int> gi, hi;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] != Complex{}) gi.push_back(static_cast<int>(i));
    if (h[i] != Complex{}) hi.push_back(static_cast<int>(i));
  }
  for (int i : gi) {
    for (int j : hi) t.emplace_back(i, j, coef * g[i] * h[j]);
  }
}

}  // namespace

SparseMatrixC dynamic_matrix(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat) {
  check_wave(sys, wave, cat);
  const double w = wave.omega();
  const Complex coef(0.0, wave.ky(cat.c_halfspace) / (cat.rho_a * sys.lx));
  std::vector<Eigen::Triplet<Complex>> t;
  add_rank_one(t, sys.g_bottom, sys.h_bottom, coef);
  add_rank_one(t, sys.g_top, sys.h_top, coef);
  SparseMatrixC C(sys.size(), sys.size());
  C.setFromTriplets(t.begin(), t.end());
  SparseMatrixC A = sys.K - (w * w) * sys.M + C;
  A.makeCompressed();
  return A;
}

VectorC excitation(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat) {
  check_wave(sys, wave, cat);
  const Complex coef = Complex(0.0, 2.0 * wave.ky(cat.c_halfspace) / cat.rho_a) * wave.amplitude;
  return coef * sys.g_bottom;
}

ReducedAssembler::ReducedAssembler(const GridSpec& grid, double nu, double kx)
    : grid_(grid), nu_(nu), kx_(kx) {
  grid.validate();
  element_ = reference_element_matrices(0.5 * grid.element_size, 0.5 * grid.element_size, nu);
  bloch_ = make_bloch_operator(grid, kx);
  layout_.num_nodes = bloch_.num_master_nodes;
  const int ne = grid.num_elements();
  dofs_.resize(ne);
  phases_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto nodes = element_nodes(grid, e);
    for (int i = 0; i < 4; ++i) {
      const int m = bloch_.master_of[nodes[i]];
      const Complex ph = bloch_.phase_of[nodes[i]];
      dofs_[e][2 * i] = layout_.ux(m);
      dofs_[e][2 * i + 1] = layout_.uy(m);
      dofs_[e][8 + i] = layout_.p(m);
      phases_[e][2 * i] = phases_[e][2 * i + 1] = phases_[e][8 + i] = ph;
    }
  }

  const auto row = row_trace(grid, kx);
  const DofLayout full{grid.num_nodes()};
  traces_.kx = kx;
  traces_.h_bottom = VectorC::Zero(full.size());
  traces_.h_top = VectorC::Zero(full.size());
  for (int ix = 0; ix <= grid.nx; ++ix) {
    traces_.h_bottom[full.p(grid.node_index(ix, 0))] = row[ix];
    traces_.h_top[full.p(grid.node_index(ix, grid.ny))] = row[ix];
  }
  const SparseMatrixC LH = bloch_.Lambda.adjoint();
  g_bottom_ = LH * traces_.h_bottom.conjugate();
  g_top_ = LH * traces_.h_top.conjugate();
  h_bottom_ = bloch_.Lambda.transpose() * traces_.h_bottom;
  h_top_ = bloch_.Lambda.transpose() * traces_.h_top;

  const int n = layout_.size();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(ne) * 144);
  for (int e = 0; e < ne; ++e) {
    for (int j = 0; j < 12; ++j) {
      for (int i = 0; i < 12; ++i) t.emplace_back(dofs_[e][i], dofs_[e][j], Complex(1.0, 0.0));
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(t.begin(), t.end());
  pattern_.makeCompressed();
  scatter_.resize(ne);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (int e = 0; e < ne; ++e) {
    for (int j = 0; j < 12; ++j) {
      const int col = dofs_[e][j];
      for (int i = 0; i < 12; ++i) {
        const int rowi = dofs_[e][i];
        const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], rowi);
        scatter_[e][j * 12 + i] = static_cast<int>(pos - inner);
      }
    }
  }
}

ReducedSystem ReducedAssembler::assemble(const Field& density, const MaterialCatalog& cat) const {
  cat.validate();
  if (std::abs(cat.nu - nu_) > 0.0) throw StateError("assembler was built for a different Poisson ratio");
  check_field(density, grid_);
  ReducedSystem r;
  r.layout = layout_;
  r.lambda_x = bloch_.lambda_x;
  r.kx = kx_;
  r.lx = grid_.lx();
  r.K = pattern_;
  r.M = pattern_;
  Complex* kv = r.K.valuePtr();
  Complex* mv = r.M.valuePtr();
  std::fill(kv, kv + r.K.nonZeros(), Complex{});
  std::fill(mv, mv + r.M.nonZeros(), Complex{});
  const bool periodic_phase = bloch_.lambda_x != Complex(1.0, 0.0);
  for (int e = 0; e < grid_.num_elements(); ++e) {
    const auto blocks = element_blocks(element_, interpolate_element(density[e], cat));
    const auto& pos = scatter_[e];
    if (!periodic_phase) {
      for (int j = 0; j < 12; ++j) {
        for (int i = 0; i < 12; ++i) {
          kv[pos[j * 12 + i]] += blocks.K(i, j);
          mv[pos[j * 12 + i]] += blocks.M(i, j);
        }
      }
      continue;
    }
    const auto& ph = phases_[e];
    for (int j = 0; j < 12; ++j) {
      for (int i = 0; i < 12; ++i) {
        const Complex f = std::conj(ph[i]) * ph[j];
        kv[pos[j * 12 + i]] += f * blocks.K(i, j);
        mv[pos[j * 12 + i]] += f * blocks.M(i, j);
      }
    }
  }
  r.g_bottom = g_bottom_;
  r.g_top = g_top_;
  r.h_bottom = h_bottom_;
  r.h_top = h_top_;
  return r;
}

void write_coordinate(std::ostream& os, const SparseMatrixC& m) {
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
}

}  // namespace stlopt
