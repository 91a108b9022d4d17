#include "stlopt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stlopt/errors.hpp"

namespace stlopt {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  std::vector<double> t;
  if (!(hi > lo)) {
    t.push_back(lo);
    return t;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("plot series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (spec.log_x && !(s.x[i] > 0.0)) continue;
      const double xv = spec.log_x ? std::log10(s.x[i]) : s.x[i];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2.0 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(xmin, xmax)) {
    const double px = X(t);
    os << "<line x1=\"" << px << "\" y1=\"" << top + ph << "\" x2=\"" << px << "\" y2=\"" << top + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << fmt(spec.log_x ? std::pow(10.0, t) : t) << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax)) {
    const double py = Y(t);
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << py << "\" x2=\"" << left << "\" y2=\"" << py
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << py << "\" x2=\"" << left + pw << "\" y2=\"" << py
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color = s.color.empty() ? kPalette[k % 7] : s.color;
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i]) || (spec.log_x && !(s.x[i] > 0.0))) continue;
        const double xv = spec.log_x ? std::log10(s.x[i]) : s.x[i];
        os << "<circle cx=\"" << X(xv) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i]) || (spec.log_x && !(s.x[i] > 0.0))) continue;
        const double xv = spec.log_x ? std::log10(s.x[i]) : s.x[i];
        os << X(xv) << ',' << Y(s.y[i]) << ' ';
      }
      os << "\"/>\n";
    }
    const double ly = top + 16 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << left + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + 36 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_density_svg(const std::vector<std::vector<double>>& rows, int cell_px) {
  const std::size_t ny = rows.size();
  const std::size_t nx = ny ? rows.front().size() : 0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nx * cell_px << "\" height=\"" << ny * cell_px
     << "\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t r = 0; r < ny; ++r) {
    if (rows[r].size() != nx) throw DimensionError("ragged density rows");
    for (std::size_t c = 0; c < nx; ++c) {
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - std::clamp(rows[r][c], 0.0, 1.0))));
      os << "<rect x=\"" << c * cell_px << "\" y=\"" << r * cell_px << "\" width=\"" << cell_px << "\" height=\""
         << cell_px << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace stlopt
