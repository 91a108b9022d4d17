#include "stlopt_cli/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"
#include "stlopt/montecarlo.hpp"
#include "stlopt/svg.hpp"

namespace stlopt::cli {

namespace fs = std::filesystem;

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw DimensionError("CSV has no column '" + name + "'");
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(c < static_cast<int>(r.size()) ? r[c] : std::string());
  return out;
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  std::vector<double> out;
  for (const auto& s : strings(name)) out.push_back(s.empty() ? std::nan("") : std::strtod(s.c_str(), nullptr));
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::string plot_grouped(const CsvTable& t, const std::string& x, const std::string& y, const std::string& group,
                         const std::string& title, const std::string& x_label, const std::string& y_label, bool log_x,
                         bool markers) {
  const auto xs = t.numbers(x);
  const auto ys = t.numbers(y);
  const auto gs = group.empty() ? std::vector<std::string>(xs.size()) : t.strings(group);
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) { return s.label == gs[i]; });
    if (it == series.end()) {
      series.push_back({gs[i], {}, {}, markers, {}});
      it = series.end() - 1;
    }
    it->x.push_back(xs[i]);
    it->y.push_back(ys[i]);
  }
  return render_svg({title, x_label, y_label, log_x}, series);
}

std::string plot_history(const CsvTable& h) {
  const auto it = h.numbers("iter");
  std::vector<PlotSeries> series;
  for (const char* tag : {"b", "e", "d"}) {
    const std::string col = std::string("stl_") + tag;
    if (h.column(col) < 0) continue;
    series.push_back({col, it, h.numbers(col), false, {}});
  }
  return render_svg({"Band-averaged STL per iteration", "iteration", "STL [dB]"}, series);
}

std::string plot_spectrum(const CsvTable& spectrum, const CsvTable* reference) {
  std::vector<PlotSeries> series;
  auto add = [&](const CsvTable& t, const std::string& xcol, const std::string& gcol) {
    const auto xs = t.numbers(xcol);
    const auto ys = t.numbers("stl_db");
    const auto gs = t.strings(gcol);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      auto s = std::find_if(series.begin(), series.end(), [&](const PlotSeries& p) { return p.label == gs[i]; });
      if (s == series.end()) {
        series.push_back({gs[i], {}, {}, false, {}});
        s = series.end() - 1;
      }
      s->x.push_back(xs[i]);
      s->y.push_back(ys[i]);
    }
  };
  add(spectrum, spectrum.column("omega_hz") >= 0 ? "omega_hz" : "frequency_hz",
      spectrum.column("design_tag") >= 0 ? "design_tag" : "curve");
  if (reference) add(*reference, "frequency_hz", "curve");
  return render_svg({"Sound transmission loss", "frequency [Hz]", "STL [dB]"}, series);
}

std::string plot_oracle(const CsvTable& oracle) {
  return plot_grouped(oracle, "frequency_hz", "stl_db", "curve", "Analytic STL", "frequency [Hz]", "STL [dB]", true);
}

namespace {

std::vector<PlotSeries> by_strategy(const std::vector<double>& x, const std::vector<double>& y,
                                    const std::vector<std::string>& strategy, bool markers) {
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto s = std::find_if(series.begin(), series.end(), [&](const PlotSeries& p) { return p.label == strategy[i]; });
    if (s == series.end()) {
      series.push_back({strategy[i], {}, {}, markers, {}});
      s = series.end() - 1;
    }
    s->x.push_back(x[i]);
    s->y.push_back(y[i]);
  }
  return series;
}

}  // namespace

std::string plot_scatter(const CsvTable& scatter) {
  const auto lo = scatter.numbers("f_minus");
  const auto hi = scatter.numbers("f_plus");
  std::vector<double> centre(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) centre[i] = 0.5 * (lo[i] + hi[i]);
  auto series = by_strategy(centre, scatter.numbers("ratio"), scatter.strings("strategy"), true);
  if (!centre.empty()) {
    const auto [mn, mx] = std::minmax_element(centre.begin(), centre.end());
    series.push_back({"HP threshold", {*mn, *mx}, {kHighPerformanceRatio, kHighPerformanceRatio}, false, "#777777"});
  }
  return render_svg({"Optima relative to the mass law", "band centre [Hz]", "STL* / STL_ml"}, series);
}

std::string plot_p_hp(const CsvTable& stats) {
  std::vector<double> centre;
  for (const auto& b : stats.strings("band")) {
    const auto dash = b.find('-', 1);
    const double lo = std::strtod(b.substr(0, dash).c_str(), nullptr);
    const double hi = dash == std::string::npos ? lo : std::strtod(b.substr(dash + 1).c_str(), nullptr);
    centre.push_back(0.5 * (lo + hi));
  }
  return render_svg({"Share of high-performing optima", "band centre [Hz]", "P_HP [%]"},
                    by_strategy(centre, stats.numbers("p_hp"), stats.strings("strategy"), false));
}

std::vector<fs::path> regenerate_plots(const fs::path& dir) {
  std::vector<fs::path> written;
  auto load = [&](const char* name) { return parse_csv(read_file(dir / name)); };
  auto emit = [&](const char* name, const std::string& svg) {
    atomic_write(dir / name, svg);
    written.push_back(dir / name);
  };
  if (fs::exists(dir / "history.csv")) emit("history.svg", plot_history(load("history.csv")));
  if (fs::exists(dir / "spectrum.csv")) {
    const CsvTable spec = load("spectrum.csv");
    if (fs::exists(dir / "reference.csv")) {
      const CsvTable ref = load("reference.csv");
      emit("spectrum.svg", plot_spectrum(spec, &ref));
    } else {
      emit("spectrum.svg", plot_spectrum(spec, nullptr));
    }
  }
  if (fs::exists(dir / "oracle.csv")) emit("oracle.svg", plot_oracle(load("oracle.csv")));
  if (fs::exists(dir / "scatter.csv")) emit("scatter.svg", plot_scatter(load("scatter.csv")));
  if (fs::exists(dir / "stats.csv")) emit("p_hp.svg", plot_p_hp(load("stats.csv")));
  return written;
}

}  // namespace stlopt::cli
