#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "stlopt/errors.hpp"
#include "stlopt/io.hpp"
#include "stlopt/montecarlo.hpp"

using namespace stlopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stlopt_mc_" + name);
  fs::remove_all(p);
  return p;
}

// STL follows the mean core density of the initial guess; the band shifts the reference.
class StubProblem : public DesignProblem {
 public:
  StubProblem(const GridSpec& g, const FrequencyBand& b) : grid_(g), band_(b) {}
  int num_variables() const override { return grid_.num_elements(); }
  std::vector<int> free_variables() const override {
    std::vector<int> v;
    for (int e = 0; e < grid_.num_elements(); ++e)
      if (!grid_.is_fixed(e)) v.push_back(e);
    return v;
  }
  ProblemEvaluation evaluate(const Field& xi, const StageState&, bool) override {
    ProblemEvaluation e;
    e.designs = {DesignTag::blueprint};
    double core = 0.0;
    for (int i : free_variables()) core += xi[i];
    core /= static_cast<double>(free_variables().size());
    e.stl = {400.0 * core};
    e.dstl = {Field::Zero(grid_.num_elements())};
    e.J_vol = -0.1;
    e.dJ_vol = Field::Zero(grid_.num_elements());
    e.J_conn = -0.5;
    e.dJ_conn = Field::Zero(grid_.num_elements());
    return e;
  }
  double mass_law_reference(double) const override { return 180.0 + band_.f_minus / 100.0; }

 private:
  GridSpec grid_;
  FrequencyBand band_;
};

CampaignSpec stub_spec() {
  CampaignSpec s;
  s.grid = GridSpec::square(8);
  s.bands = {{500, 1000, 5}, {2000, 2500, 5}, {3000, 3500, 5}};
  s.strategies = {StrategyKind::baseline, StrategyKind::E1};
  s.runs_per_cell = 5;
  s.seed = 3;
  return s;
}

ProblemFactory stub_factory(const GridSpec& g, std::atomic<int>* count = nullptr) {
  return [g, count](const FrequencyBand& b) {
    if (count) ++*count;
    return std::make_unique<StubProblem>(g, b);
  };
}

RunRecord hp_record(double stl, int iters) {
  RunRecord r;
  r.strategy = "baseline";
  r.stl_star = stl;
  r.stl_ml = 30.0;
  r.iterations = iters;
  r.classification = classify(stl, 30.0);
  return r;
}

}  // namespace

TEST(Classify, Threshold) {
  EXPECT_EQ(classify(44.0, 40.0), Performance::high);
  EXPECT_EQ(classify(43.99, 40.0), Performance::low);
  EXPECT_EQ(classify(80.0, 40.0), Performance::high);
  EXPECT_EQ(classify(30.0, 40.0), Performance::low);
  EXPECT_THROW(classify(std::nan(""), 40.0), DomainError);
  EXPECT_STREQ(to_string(Performance::high), "HP");
  EXPECT_STREQ(to_string(Performance::low), "LP");
}

TEST(Regions, Boundaries) {
  EXPECT_EQ(region_for(0.0), Region::low);
  EXPECT_EQ(region_for(20.0), Region::low);
  EXPECT_EQ(region_for(20.1), Region::transition);
  EXPECT_EQ(region_for(79.9), Region::transition);
  EXPECT_EQ(region_for(80.0), Region::high);
}

TEST(Estimate, HalfAndHalf) {
  const EnsembleStats s = estimate_p_hp(10, 10);
  EXPECT_DOUBLE_EQ(s.p_hp, 50.0);
  EXPECT_NEAR(s.standard_error, 100.0 * std::sqrt(0.25 / 20.0), 1e-12);
  EXPECT_NEAR(s.standard_error, 11.18, 0.01);
  const auto [lo, hi] = s.confidence_interval();
  EXPECT_NEAR(lo, 28.09, 0.01);
  EXPECT_NEAR(hi, 71.91, 0.01);
  EXPECT_EQ(s.region, Region::transition);
}

TEST(Estimate, Extremes) {
  const EnsembleStats all = estimate_p_hp(20, 0);
  EXPECT_EQ(all.p_hp, 100.0);
  EXPECT_EQ(all.standard_error, 0.0);
  EXPECT_EQ(all.region, Region::high);
  EXPECT_EQ(all.confidence_interval().second, 100.0);
  const EnsembleStats few = estimate_p_hp(3, 17);
  EXPECT_DOUBLE_EQ(few.p_hp, 15.0);
  EXPECT_EQ(few.region, Region::low);
  EXPECT_EQ(few.confidence_interval().first, 0.0);
  EXPECT_THROW(estimate_p_hp(0, 0), DomainError);
  EXPECT_THROW(estimate_p_hp(-1, 3), InvalidParameter);
}

TEST(Estimate, FromRecordsSkipsFailures) {
  std::vector<RunRecord> r{hp_record(40, 200), hp_record(50, 400), hp_record(20, 100)};
  RunRecord failed;
  failed.error = "solver blew up";
  r.push_back(failed);
  const EnsembleStats s = estimate_p_hp(r);
  EXPECT_EQ(s.n_hp, 2);
  EXPECT_EQ(s.n_lp, 1);
  EXPECT_NEAR(*s.stl_hp_mean, 45.0, 1e-12);
  EXPECT_NEAR(*s.n_iter_hp_mean, 300.0, 1e-12);
}

TEST(Criteria, MeansOverHp) {
  const HpCriteria c = aggregate_criteria({hp_record(40, 200), hp_record(50, 400), hp_record(10, 999)});
  EXPECT_NEAR(*c.stl_hp, 45.0, 1e-12);
  EXPECT_NEAR(*c.n_iter_hp, 300.0, 1e-12);
  const HpCriteria none = aggregate_criteria({hp_record(10, 5)});
  EXPECT_FALSE(none.stl_hp);
  EXPECT_FALSE(none.n_iter_hp);
}

TEST(RecordJson, RoundTrip) {
  RunRecord r = hp_record(41.5, 321);
  r.band = {2000, 2500, 5};
  r.band_index = 1;
  r.seed = 99;
  r.run_index = 4;
  r.converged = true;
  r.termination = "converged";
  r.design_path = "designs/x.txt";
  EXPECT_EQ(run_record_from_json(to_json(r)), r);
  RunRecord f = r;
  f.error = "boom";
  const auto j = to_json(f);
  EXPECT_FALSE(j.contains("stl_star"));
  EXPECT_TRUE(run_record_from_json(j).failed());
  auto bad = to_json(r);
  bad["classification"] = "LP";
  EXPECT_THROW(run_record_from_json(bad), ConfigError);
  EXPECT_THROW(run_record_from_json(nlohmann::json::object()), ConfigError);
}

TEST(Campaign, RunsEveryCell) {
  const fs::path dir = scratch("cells");
  const CampaignSpec spec = stub_spec();
  std::atomic<int> built{0};
  const CampaignResult res = run_campaign(spec, dir, stub_factory(spec.grid, &built));
  EXPECT_EQ(res.executed, 30);
  EXPECT_EQ(res.skipped, 0);
  EXPECT_EQ(res.records.size(), 30u);
  EXPECT_EQ(built.load(), 30);
  EXPECT_EQ(res.cells.size(), 6u);
  for (const auto& c : res.cells) EXPECT_EQ(c.stats.size(), 5);
  EXPECT_TRUE(fs::exists(dir / "stats.csv"));
  EXPECT_TRUE(fs::exists(dir / "scatter.csv"));
  EXPECT_TRUE(fs::exists(dir / "records" / record_file_name(StrategyKind::E1, 2, 4)));
  for (const auto& r : res.records) {
    EXPECT_FALSE(r.failed());
    EXPECT_TRUE(fs::exists(dir / r.design_path));
  }
  fs::remove_all(dir);
}

TEST(Campaign, StrategiesShareInitialGuesses) {
  const fs::path dir = scratch("shared");
  CampaignSpec spec = stub_spec();
  spec.write_histories = true;
  run_campaign(spec, dir, stub_factory(spec.grid));
  auto first_stl = [&](StrategyKind k, int b, int r) {
    std::string name = record_file_name(k, b, r);
    name = name.substr(0, name.size() - 5) + ".csv";
    std::istringstream is(read_file(dir / "histories" / name));
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    return split_csv_line(line).at(2);
  };
  std::set<std::string> distinct;
  for (int b = 0; b < 3; ++b) {
    for (int r = 0; r < 5; ++r) {
      EXPECT_EQ(first_stl(StrategyKind::baseline, b, r), first_stl(StrategyKind::E1, b, r));
      distinct.insert(first_stl(StrategyKind::baseline, b, r));
    }
  }
  EXPECT_EQ(distinct.size(), 15u);
  fs::remove_all(dir);
}

TEST(Campaign, ResumeSkipsFinishedRuns) {
  const fs::path dir = scratch("resume");
  CampaignSpec spec = stub_spec();
  const CampaignResult first = run_campaign(spec, dir, stub_factory(spec.grid));
  fs::remove(dir / "records" / record_file_name(StrategyKind::baseline, 1, 2));
  std::atomic<int> built{0};
  const CampaignResult second = run_campaign(spec, dir, stub_factory(spec.grid, &built));
  EXPECT_EQ(second.executed, 1);
  EXPECT_EQ(second.skipped, 29);
  EXPECT_EQ(built.load(), 1);
  EXPECT_EQ(second.records, first.records);
  fs::remove_all(dir);
}

TEST(Campaign, WorkerCountDoesNotChangeResults) {
  const fs::path d1 = scratch("w1"), d3 = scratch("w3");
  CampaignSpec spec = stub_spec();
  const CampaignResult a = run_campaign(spec, d1, stub_factory(spec.grid));
  spec.workers = 3;
  const CampaignResult b = run_campaign(spec, d3, stub_factory(spec.grid));
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(read_file(d1 / "stats.csv"), read_file(d3 / "stats.csv"));
  fs::remove_all(d1);
  fs::remove_all(d3);
}

TEST(Campaign, StatsRecomputedFromDisk) {
  const fs::path dir = scratch("disk");
  const CampaignSpec spec = stub_spec();
  const CampaignResult res = run_campaign(spec, dir, stub_factory(spec.grid));
  const auto loaded = load_records(dir);
  EXPECT_EQ(loaded.size(), 30u);
  EXPECT_EQ(format_stats_csv(tabulate(loaded)), read_file(dir / "stats.csv"));
  EXPECT_EQ(format_stats_csv(res.cells), read_file(dir / "stats.csv"));
  // every cell's p_hp equals a direct count over the stored scatter rows
  std::istringstream scatter(read_file(dir / "scatter.csv"));
  std::string line;
  std::getline(scatter, line);
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> counts;
  while (std::getline(scatter, line)) {
    const auto c = split_csv_line(line);
    auto& n = counts[{c[0], c[2]}];
    (c[8] == "HP" ? n.first : n.second)++;
  }
  for (const auto& cell : res.cells) {
    std::ostringstream f;
    f << std::setprecision(12) << cell.band.f_minus;
    const auto n = counts.at({f.str(), cell.strategy});
    EXPECT_EQ(cell.stats.n_hp, n.first);
    EXPECT_EQ(cell.stats.n_lp, n.second);
  }
  fs::remove_all(dir);
}

TEST(Campaign, FailedRunIsRecorded) {
  const fs::path dir = scratch("failed");
  CampaignSpec spec = stub_spec();
  spec.bands = {{500, 1000, 5}};
  spec.strategies = {StrategyKind::baseline};
  spec.runs_per_cell = 2;
  const GridSpec wrong = GridSpec::square(6);
  const CampaignResult res = run_campaign(spec, dir, stub_factory(wrong));
  ASSERT_EQ(res.records.size(), 2u);
  for (const auto& r : res.records) EXPECT_TRUE(r.failed());
  EXPECT_TRUE(res.cells.empty());
  EXPECT_EQ(load_records(dir).size(), 2u);
  fs::remove_all(dir);
}

TEST(Campaign, RejectsEmptySpec) {
  CampaignSpec spec = stub_spec();
  spec.bands.clear();
  EXPECT_THROW(run_campaign(spec, scratch("empty"), stub_factory(spec.grid)), InvalidParameter);
}
