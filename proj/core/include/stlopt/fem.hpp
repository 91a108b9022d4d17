#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stlopt/design_field.hpp"
#include "stlopt/grid.hpp"
#include "stlopt/material.hpp"

namespace stlopt {

using SparseMatrixC = Eigen::SparseMatrix<Complex>;
using SparseMatrixD = Eigen::SparseMatrix<double>;
using VectorC = Eigen::VectorXcd;
using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Matrix4d = Eigen::Matrix4d;
using Matrix84d = Eigen::Matrix<double, 8, 4>;

/// Unit-coefficient matrices of one rectangular Q4 element.
///
/// Local nodes run counterclockwise from the lower-left corner; structural
/// DOFs are interleaved (ux0, uy0, ux1, ...). The coupling matrix is
/// S = -(closed boundary integral of N_u^T n N_p) with n the outward normal.
struct ElementMatrices {
  Matrix8d Ks;   ///< plane-strain stiffness for unit modulus
  Matrix8d Ms;   ///< consistent mass for unit density
  Matrix4d Ka;   ///< acoustic stiffness (gradient) for unit coefficient
  Matrix4d Ma;   ///< acoustic mass for unit coefficient
  Matrix84d S;   ///< solid-fluid coupling
  Matrix84d S_bottom;  ///< contribution of the lower edge to S
  Matrix84d S_top;     ///< contribution of the upper edge to S
};

/// Element of half-width a and half-height b.
ElementMatrices reference_element_matrices(double a, double b, double nu);

/// DOF layout of the unreduced system: q = (u, p) with the displacement
/// block first (2 entries per node) and then one pressure per node.
struct DofLayout {
  int num_nodes = 0;
  int ux(int node) const { return 2 * node; }
  int uy(int node) const { return 2 * node + 1; }
  int p(int node) const { return 2 * num_nodes + node; }
  int size() const { return 3 * num_nodes; }
  int num_structural() const { return 2 * num_nodes; }
};

/// Global node ids of element e in local order.
std::array<int, 4> element_nodes(const GridSpec& grid, int e);

/// Halfspace trace data: h_j = integral of N_j(x) exp(+i kx x) along the
/// lower (h_bottom) or upper (h_top) boundary, indexed by DOF.
struct BoundaryTraces {
  VectorC h_bottom;
  VectorC h_top;
  double kx = 0.0;
};

/// Vibro-acoustic system of one physical density field.
///
/// K carries the structural and acoustic stiffness and the pressure load
/// on the solid (upper-right block), M carries the masses and the solid
/// motion forcing the fluid (lower-left block). The halfspaces enter
/// through the boundary traces, see dynamic_matrix().
struct AssembledSystem {
  SparseMatrixC K;
  SparseMatrixC M;
  BoundaryTraces traces;
  DofLayout layout;
  double lx = 0.0;
};

/// Reference assembly on the full periodic-free node grid.
AssembledSystem assemble(const Field& density, const MaterialCatalog& cat, const GridSpec& grid,
                         double kx = 0.0);

/// Bloch-Floquet reduction matrix (full DOFs x master DOFs).
struct BlochOperator {
  Complex lambda_x;
  SparseMatrixC Lambda;
  int num_master_nodes = 0;
  /// Master node of every full node and the phase relating the two.
  std::vector<int> master_of;
  std::vector<Complex> phase_of;
};

BlochOperator make_bloch_operator(const GridSpec& grid, double kx);

/// Master-DOF system: Kr = Lambda^H K Lambda etc.
///
/// `g_*` are the conjugated-phase load vectors Lambda^H conj(h) and `h_*`
/// the reduced trace weights Lambda^T h.
struct ReducedSystem {
  SparseMatrixC K;
  SparseMatrixC M;
  VectorC g_bottom, h_bottom;
  VectorC g_top, h_top;
  DofLayout layout;  ///< over master nodes
  Complex lambda_x;
  double kx = 0.0;
  double lx = 0.0;
  int size() const { return static_cast<int>(K.rows()); }
};

ReducedSystem bloch_reduce(const AssembledSystem& sys, double kx, const GridSpec& grid);

/// Plane wave hitting the lower face.
struct IncidentWave {
  double frequency_hz = 1000.0;
  double theta = 0.0;  ///< incidence angle [rad]
  Complex amplitude{1.0, 0.0};

  double omega() const;
  double kx(double c) const;
  double ky(double c) const;
};

/// Dynamic matrix K - w^2 M + i ky/(rho_a Lx) (g h^T) for both halfspaces.
SparseMatrixC dynamic_matrix(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat);
/// Right-hand side 2 i ky P_i / rho_a * g_bottom.
VectorC excitation(const ReducedSystem& sys, const IncidentWave& wave, const MaterialCatalog& cat);

/// Assembles master-DOF systems directly using a precomputed scatter map.
///
/// Produces the same matrices as bloch_reduce(assemble(...)) without the
/// intermediate full system; the sparsity pattern is fixed per grid so
/// every system it builds is structurally identical.
class ReducedAssembler {
 public:
  ReducedAssembler(const GridSpec& grid, double nu, double kx = 0.0);

  ReducedSystem assemble(const Field& density, const MaterialCatalog& cat) const;

  const GridSpec& grid() const { return grid_; }
  const ElementMatrices& element() const { return element_; }
  const BlochOperator& bloch() const { return bloch_; }
  const DofLayout& layout() const { return layout_; }
  /// Master DOFs of element e in local order (8 structural, then 4 pressure).
  const std::array<int, 12>& element_dofs(int e) const { return dofs_[e]; }
  /// Phase factor of each local DOF of element e.
  const std::array<Complex, 12>& element_phases(int e) const { return phases_[e]; }
  /// Reduced trace weights of the upper boundary (Lambda^T h_top).
  const VectorC& h_top() const { return h_top_; }
  const VectorC& h_bottom() const { return h_bottom_; }

 private:
  GridSpec grid_;
  double nu_;
  double kx_;
  ElementMatrices element_;
  BlochOperator bloch_;
  DofLayout layout_;
  std::vector<std::array<int, 12>> dofs_;
  std::vector<std::array<Complex, 12>> phases_;
  SparseMatrixC pattern_;
  std::vector<std::array<int, 144>> scatter_;
  BoundaryTraces traces_;
  VectorC g_bottom_, h_bottom_, g_top_, h_top_;
};

/// Writes a sparse matrix as "row col re im" lines (0-based).
void write_coordinate(std::ostream& os, const SparseMatrixC& m);

}  // namespace stlopt
