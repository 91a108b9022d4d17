#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stlopt/grid.hpp"

namespace stlopt {

using Field = Eigen::VectorXd;

/// Raw optimization variables on the element grid.
struct DesignVector {
  Field values;
  GridSpec grid;

  DesignVector() = default;
  DesignVector(Field v, const GridSpec& g);

  /// Forces the plate rows to solid.
  void apply_mask();
  /// Throws DomainError if an entry leaves [0,1] or a plate entry is not 1.
  void validate() const;
};

/// Forces `field` to 1 on the plate rows of `grid`.
void apply_plate_mask(Field& field, const GridSpec& grid);
/// Zeroes `gradient` on the plate rows of `grid`.
void zero_plate_entries(Field& gradient, const GridSpec& grid);

/// Parameters of the two-stage smoothing/projection chain.
///
/// Thresholds follow the usual convention of the projection: a larger
/// threshold removes material. The eroded realizations therefore use
/// eta_b + delta_eta and eta_e2, the dilated ones eta_b - delta_eta and
/// eta_d2.
struct FilterSpec {
  double r1 = 14.0;  ///< first smoothing radius [element widths]
  double r2 = 7.0;   ///< second smoothing radius [element widths]
  double beta1 = 1.0;
  double beta2 = 0.5;
  double eta_b = 0.5;
  double delta_eta = 0.1;
  double eta_e2 = 0.6;
  double eta_d2 = 0.4;

  double eta_e() const { return eta_b + delta_eta; }
  double eta_d() const { return eta_b - delta_eta; }

  void validate() const;
  bool operator==(const FilterSpec&) const = default;

  /// Radii given in metres converted to element widths of `grid`.
  static FilterSpec for_grid(const GridSpec& grid, double r1_m = 7e-3, double r2_m = 3.5e-3);
};

/// The five projected density fields of one design.
struct PhysicalDesignSet {
  Field b, e, d, e2, d2;
};

enum class DesignTag { blueprint, eroded, dilated };

const Field& field_for(const PhysicalDesignSet& set, DesignTag tag);
const char* to_string(DesignTag tag);

/// Density filter with hat weights and periodic wrap in x.
///
/// Stored as a row-normalized sparse matrix so that the forward pass is
/// W * field and the adjoint pass is W^T * gradient.
class SmoothingFilter {
 public:
  SmoothingFilter(const GridSpec& grid, double radius);

  Field apply(const Field& field) const;
  Field apply_transpose(const Field& gradient) const;

  double radius() const { return radius_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& weights() const { return weights_; }

 private:
  GridSpec grid_;
  double radius_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> weights_;
};

/// One-shot smoothing of `field` (builds the filter each call).
Field smooth_filter(const Field& field, double radius, const GridSpec& grid);

/// Smoothed Heaviside projection applied entrywise.
Field heaviside_project(const Field& field, double eta, double beta);
/// Entrywise derivative of heaviside_project with respect to its input.
Field heaviside_derivative(const Field& field, double eta, double beta);
double heaviside_project(double value, double eta, double beta);
double heaviside_derivative(double value, double eta, double beta);

/// Intermediate fields of a forward pass, kept for backpropagation.
struct ChainState {
  FilterSpec spec;
  Field masked;      ///< xi with plates forced solid
  Field smoothed1;
  Field projected1;
  Field smoothed2;
  PhysicalDesignSet fields;
};

/// Upstream gradients with respect to the physical fields; empty entries
/// are treated as zero.
struct FieldGradients {
  Field b, e, d, e2, d2;
};

class FilterChain {
 public:
  FilterChain(const GridSpec& grid, double r1, double r2);
  explicit FilterChain(const GridSpec& grid, const FilterSpec& spec)
      : FilterChain(grid, spec.r1, spec.r2) {}

  ChainState forward(const Field& xi, const FilterSpec& spec) const;
  /// Gradient with respect to the raw variables; zero on plate rows.
  Field backprop(const ChainState& state, const FieldGradients& upstream) const;

  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  SmoothingFilter first_;
  SmoothingFilter second_;
};

PhysicalDesignSet build_physical_designs(const DesignVector& xi, const FilterSpec& spec);

}  // namespace stlopt
