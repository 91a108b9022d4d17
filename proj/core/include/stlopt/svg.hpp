#pragma once

#include <string>
#include <vector>

namespace stlopt {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  ///< scatter points instead of a polyline
  std::string color;     ///< empty selects from the default palette
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 640;
  int height = 420;
};

/// Standalone SVG document with axes, ticks, legend and the given series.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

/// Grayscale image of a density field (row 0 of `rows` drawn on top).
std::string render_density_svg(const std::vector<std::vector<double>>& rows, int cell_px = 6);

}  // namespace stlopt
