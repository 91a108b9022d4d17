#include "stlopt/grid.hpp"

#include <sstream>

#include "stlopt/errors.hpp"

namespace stlopt {

void GridSpec::validate() const {
  if (nx < 4 || ny < 4) {
    throw InvalidParameter("grid needs at least 4 elements per direction");
  }
  if (!(element_size > 0.0) || !std::isfinite(element_size)) {
    throw InvalidParameter("element_size must be positive");
  }
  if (fixed_rows < 0 || 2 * fixed_rows >= ny) {
    throw InvalidParameter("fixed_rows must satisfy 0 <= fixed_rows and 2*fixed_rows < ny");
  }
}

GridSpec GridSpec::square(int n, double cell, double plate) {
  GridSpec g;
  g.nx = n;
  g.ny = n;
  g.element_size = cell / n;
  g.fixed_rows = static_cast<int>(std::lround(plate / g.element_size));
  g.validate();
  return g;
}

std::string to_string(const GridSpec& grid) {
  std::ostringstream os;
  os << grid.nx << "x" << grid.ny << " elements of " << grid.element_size * 1e3
     << " mm, " << grid.fixed_rows << " fixed rows";
  return os.str();
}

}  // namespace stlopt
