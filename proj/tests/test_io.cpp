#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"
#include "stlopt/random.hpp"

using namespace stlopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stlopt_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(DesignFile, RoundTrip) {
  const GridSpec g = GridSpec::square(12);
  const Field x = random_initial_guess({2, 0, 0}, g).values;
  const std::string text = format_design(x, g);
  const DesignVector d = parse_design(text);
  EXPECT_EQ(d.grid, g);
  EXPECT_LE((d.values - x).cwiseAbs().maxCoeff(), 5e-7);
  EXPECT_EQ(format_design(d.values, d.grid), text);
}

TEST(DesignFile, TopRowFirst) {
  const GridSpec g{4, 4, 1e-3, 0};
  const Field x = Field::LinSpaced(16, 0.0, 0.75);
  const std::string text = format_design(x, g);
  const auto second = text.find('\n') + 1;
  EXPECT_EQ(text.substr(second, text.find('\n', second) - second), "0.600000 0.650000 0.700000 0.750000");
}

TEST(DesignFile, Malformed) {
  EXPECT_THROW(parse_design(""), DimensionError);
  const std::string rows = "0 0 0 0\n0 0 0 0\n0 0 0 0\n";
  EXPECT_NO_THROW(parse_design("4 4 0.001 0\n" + rows + "0 0 0 0\n"));
  EXPECT_THROW(parse_design("4 4 0.001 0\n" + rows + "0 0 0\n"), DimensionError);
  EXPECT_THROW(parse_design("4 4 0.001 0\n" + rows + "0 0 0 0 1\n"), DimensionError);
  EXPECT_THROW(parse_design("4 4 0.001 0\n" + rows + "0 x 0 0\n"), DimensionError);
  EXPECT_THROW(parse_design("4 4 0.001 0\n" + rows + "0 0 0 1.5\n"), DomainError);
  EXPECT_THROW(format_design(Field::Zero(3), GridSpec{2, 2, 1e-3, 0}), DimensionError);
}

TEST(DesignFile, DiskRoundTrip) {
  const fs::path dir = scratch("design");
  const GridSpec g = GridSpec::square(8);
  const Field x = random_initial_guess({1, 0, 0}, g).values;
  write_design(dir / "sub" / "d.txt", x, g);
  EXPECT_FALSE(fs::exists(dir / "sub" / "d.txt.tmp"));
  EXPECT_EQ(read_design(dir / "sub" / "d.txt").grid, g);
  EXPECT_THROW(read_design(dir / "missing.txt"), Error);
  fs::remove_all(dir);
}

TEST(AtomicWrite, ReplacesContent) {
  const fs::path dir = scratch("atomic");
  atomic_write(dir / "a.txt", "first");
  atomic_write(dir / "a.txt", "second");
  EXPECT_EQ(read_file(dir / "a.txt"), "second");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
  fs::remove_all(dir);
}

TEST(Csv, Split) {
  EXPECT_EQ(split_csv_line("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(split_csv_line("x"), std::vector<std::string>{"x"});
}

TEST(Csv, SpectrumColumns) {
  SpectrumResult s;
  s.tag = DesignTag::eroded;
  s.samples = {{100.0, 0.5, compute_stl(0.5)}, {200.0, 0.25, compute_stl(0.25)}};
  const std::string csv = format_spectrum_csv({s});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "omega_hz,tau,stl_db,design_tag");
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  EXPECT_EQ(rows, 3);
  EXPECT_NE(csv.find(",e\n"), std::string::npos);
}

TEST(Csv, HistoryWritesNan) {
  IterationRecord r;
  r.iteration = 3;
  r.stl_b = 50.0;
  r.stl_e = r.stl_d = std::nan("");
  const std::string csv = format_history_csv({r});
  const auto header = split_csv_line(csv.substr(0, csv.find('\n')));
  EXPECT_EQ(header.size(), 16u);
  EXPECT_EQ(header[0], "iter");
  const std::string row = csv.substr(csv.find('\n') + 1);
  const auto cells = split_csv_line(row.substr(0, row.find('\n')));
  ASSERT_EQ(cells.size(), header.size());
  EXPECT_EQ(cells[3], "nan");
  EXPECT_EQ(std::stod(cells[2]), 50.0);
}

TEST(Csv, TransitionsJoinRules) {
  StageTransition t;
  t.iteration = 12;
  t.from_stage = 0;
  t.to_stage = 1;
  t.rules = {"exclusion-bound", "beta-step"};
  const std::string csv = format_transitions_csv({t});
  EXPECT_NE(csv.find("exclusion-bound+beta-step"), std::string::npos);
}
