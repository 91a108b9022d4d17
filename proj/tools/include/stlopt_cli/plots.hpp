#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace stlopt::cli {

/// Columns of a headed CSV file keyed by header name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  ///< -1 when absent
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

/// Curves of `y` over `x`, one series per distinct value of `group`.
std::string plot_grouped(const CsvTable& t, const std::string& x, const std::string& y, const std::string& group,
                         const std::string& title, const std::string& x_label, const std::string& y_label,
                         bool log_x = false, bool markers = false);

std::string plot_history(const CsvTable& history);
/// Computed spectra plus optional reference curves (e.g. the mass law).
std::string plot_spectrum(const CsvTable& spectrum, const CsvTable* reference);
std::string plot_oracle(const CsvTable& oracle);
/// STL*/STL_ml ratio against band centre per strategy, with the HP threshold.
std::string plot_scatter(const CsvTable& scatter);
/// P_HP against band centre per strategy.
std::string plot_p_hp(const CsvTable& stats);

/// Rewrites every SVG view whose CSV source exists in `dir`; returns the
/// files written.
std::vector<std::filesystem::path> regenerate_plots(const std::filesystem::path& dir);

}  // namespace stlopt::cli
