#pragma once

#include <cmath>
#include <string>

namespace stlopt {

/// Structured element grid of the periodic unit cell.
///
/// Elements are stored row-major with x running fastest: element (ix, iy)
/// has index iy * nx + ix, and iy = 0 is the row touching the lower
/// halfspace. The first and last `fixed_rows` rows form the face plates.
struct GridSpec {
  int nx = 100;
  int ny = 100;
  double element_size = 0.5e-3;
  int fixed_rows = 10;

  double lx() const { return nx * element_size; }
  double ly() const { return ny * element_size; }
  int num_elements() const { return nx * ny; }
  int num_nodes() const { return (nx + 1) * (ny + 1); }

  int element_index(int ix, int iy) const { return iy * nx + ix; }
  int element_ix(int e) const { return e % nx; }
  int element_iy(int e) const { return e / nx; }
  int node_index(int ix, int iy) const { return iy * (nx + 1) + ix; }

  /// Centre of element `e` in metres.
  double center_x(int e) const { return (element_ix(e) + 0.5) * element_size; }
  double center_y(int e) const { return (element_iy(e) + 0.5) * element_size; }

  bool is_fixed_row(int iy) const {
    return iy < fixed_rows || iy >= ny - fixed_rows;
  }
  bool is_fixed(int e) const { return is_fixed_row(element_iy(e)); }

  /// Throws InvalidParameter unless the invariants hold.
  void validate() const;

  bool operator==(const GridSpec&) const = default;

  /// 100 x 100 elements of 0.5 mm with 5 mm plates.
  static GridSpec full_resolution() { return GridSpec{}; }

  /// n x n grid over the same 50 mm cell, plates kept at 5 mm.
  static GridSpec square(int n, double cell = 0.05, double plate = 0.005);
};

std::string to_string(const GridSpec& grid);

}  // namespace stlopt
