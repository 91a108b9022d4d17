#pragma once

#include <cstdint>
#include <optional>

#include "stlopt/design_field.hpp"
#include "stlopt/grid.hpp"
#include "stlopt/material.hpp"

namespace stlopt {

/// Compliance ratio limit of the connectivity constraint.
inline constexpr double kSelfWeightRatio = 15.0;

struct VolumeResult {
  double value = 0.0;   ///< J_vol = mean(xi) / V - 1
  Field gradient;       ///< with respect to the field it was evaluated on
};

/// Volume constraint on a physical field; V is the admissible fraction.
VolumeResult volume_constraint(const Field& xi_d2, double volume_fraction = 0.5);

struct ConstraintValues {
  double J_vol = 0.0;
  double J_conn = 0.0;
  double theta_sw = 0.0;
  double theta_hat_sw = 0.0;
};

struct SelfWeightResult {
  double theta = 0.0;      ///< self-weight compliance
  double theta_hat = 0.0;  ///< fully solid reference
  double J_conn = 0.0;
  Field dJ_dxi_b;   ///< through the load
  Field dJ_dxi_e2;  ///< through the stiffness
};

/// Static self-weight problem on the structural DOFs only.
///
/// The lower boundary is clamped and the cell is periodic in x. The load
/// follows the blueprint field and the stiffness the second eroded
/// field; the gradient is obtained from the same solution.
class SelfWeightAnalysis {
 public:
  SelfWeightAnalysis(const GridSpec& grid, const MaterialCatalog& cat);

  SelfWeightResult evaluate(const Field& xi_b, const Field& xi_e2, bool with_gradient = true) const;
  /// Compliance only, u^T F.
  double compliance(const Field& xi_b, const Field& xi_e2) const;
  /// Cached fully solid reference compliance.
  double reference_compliance() const { return theta_hat_; }
  /// Number of static factorizations performed by this object.
  std::uint64_t factorizations() const { return factorizations_; }

 private:
  struct Solution;
  Solution solve(const Field& xi_b, const Field& xi_e2) const;

  GridSpec grid_;
  MaterialCatalog cat_;
  Eigen::Matrix<double, 8, 8> Ks_;
  std::vector<std::array<int, 8>> dofs_;  // free-DOF index or -1
  int n_free_ = 0;
  double theta_hat_ = 0.0;
  mutable std::uint64_t factorizations_ = 0;
};

/// Lower bound constraint value J_min - J_conn (feasible iff <= 0).
/// Throws InvalidParameter unless -1 < J_min <= 0.
double connectivity_lower_bound(double J_conn, double J_min);

/// Adaptive bound: the most negative multiple of -step strictly greater
/// than J_conn, at least one step from zero, never below `previous`.
double adaptive_connectivity_bound(double J_conn, std::optional<double> previous = std::nullopt,
                                   double step = 0.05);

}  // namespace stlopt
