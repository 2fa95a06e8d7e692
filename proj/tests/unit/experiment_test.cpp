#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oraclesim/errors.hpp"
#include "oraclesim/experiment.hpp"
#include "oraclesim/rng.hpp"

namespace oraclesim::experiment {
namespace {

namespace fs = std::filesystem;

GridSpec small_grid() {
  GridSpec g;
  g.base.population = 80;
  g.base.feeders_per_round = 10;
  g.base.rounds = 8;
  g.base.committee.cycle = 4;
  g.feeders = {10, 15};
  g.malicious_fractions = {0.1, 0.3};
  g.alpha_bands = {{0.01, 0.05}, {0.4, 0.6}};
  g.strategies = {Strategy::DecTest, Strategy::PureRandom};
  g.seeds = {1, 2};
  return g;
}

std::string combined(std::vector<CellResult> results) {
  std::ostringstream out;
  write_combined_csv(out, std::move(results));
  return out.str();
}

TEST(Grid, ExpandsFullCrossProductWithSharedShapeSeeds) {
  const auto cells = expand(small_grid());
  EXPECT_EQ(cells.size(), 2u * 2 * 2 * 2 * 2);
  for (const auto& c : cells) {
    const auto shape = "n=" + std::to_string(c.config.feeders_per_round) + ";s=" + format_number(c.config.malicious_fraction);
    EXPECT_EQ(c.config.seed, derive_seed(c.master_seed, shape));
    EXPECT_EQ(c.config.output.run_id, c.label);
  }
}

TEST(Grid, ParsesYamlAndDefaultsMissingAxes) {
  const auto g = parse_grid_text(
      "base:\n  rounds: 5\n  population: 90\ngrid:\n  feeders_per_round: [10, 20]\n  alpha_band: [[0.1, 0.3], "
      "\"0.4-0.6\"]\n  strategy: [dectest, dos_like]\n");
  EXPECT_EQ(g.base.rounds, 5u);
  EXPECT_EQ(g.feeders, (std::vector<std::uint64_t>{10, 20}));
  ASSERT_EQ(g.alpha_bands.size(), 2u);
  EXPECT_EQ(g.alpha_bands[1].hi, 0.6);
  EXPECT_EQ(g.malicious_fractions, std::vector<double>{g.base.malicious_fraction});
  EXPECT_EQ(g.seeds, std::vector<std::uint64_t>{g.base.seed});
}

TEST(Grid, RejectsUnknownKeysAndBadEntries) {
  EXPECT_THROW(parse_grid_text("grid:\n  feeders: [1]\n"), ValidationError);
  EXPECT_THROW(parse_grid_text("extra: 1\n"), ValidationError);
  EXPECT_THROW(parse_grid_text("grid:\n  strategy: [fastest]\n"), ValidationError);
  EXPECT_THROW(parse_grid_text("base:\n  rounds: x\n"), ValidationError);
  auto g = small_grid();
  g.feeders = {500};
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(Grid, YamlEchoParsesBackToSameCells) {
  const auto g = small_grid();
  const auto back = parse_grid_text(grid_yaml(g));
  const auto a = expand(g), b = expand(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(to_yaml(a[i].config), to_yaml(b[i].config));
  }
}

TEST(Sweep, ParallelEqualsSerialAndIgnoresCellOrder) {
  auto cells = expand(small_grid());
  const auto serial = combined(run_cells_serial(cells));
  const auto parallel = combined(run_cells_parallel(cells));
  EXPECT_EQ(serial, parallel);
  std::mt19937_64 gen(3);
  std::shuffle(cells.begin(), cells.end(), gen);
  EXPECT_EQ(combined(run_cells_parallel(cells)), serial);
}

TEST(Sweep, SingleCellMatchesStandaloneRun) {
  auto g = small_grid();
  g.feeders = {10};
  g.malicious_fractions = {0.3};
  g.alpha_bands = {{0.1, 0.3}};
  g.strategies = {Strategy::DecTest};
  g.seeds = {9};
  const auto cells = expand(g);
  ASSERT_EQ(cells.size(), 1u);
  const auto swept = run_cell(cells.front());
  ASSERT_FALSE(swept.error.has_value());
  auto config = cells.front().config;
  config.output.dir = (fs::temp_directory_path() / "oraclesim_single_cell").string();
  const auto direct = run_experiment(config);
  EXPECT_EQ(swept.metrics, direct.result.metrics);
  fs::remove_all(config.output.dir);
}

TEST(Sweep, CombinedCsvRoundTrips) {
  const auto results = run_cells_serial(expand(small_grid()));
  const auto text = combined(results);
  std::istringstream in(text);
  const auto rows = read_combined_csv(in);
  std::size_t expected_rows = 0;
  for (const auto& r : results) expected_rows += r.metrics.size();
  ASSERT_EQ(rows.size(), expected_rows);
  std::ostringstream header;
  header << metrics::kCsvHeader << ',' << kCombinedExtraColumns;
  EXPECT_EQ(text.substr(0, text.find('\n')), header.str());
  for (const auto& row : rows) {
    EXPECT_TRUE(row.feeders == 10 || row.feeders == 15);
    EXPECT_TRUE(row.malicious_fraction == 0.1 || row.malicious_fraction == 0.3);
  }
}

TEST(Sweep, FailedCellIsReportedNotFatal) {
  auto cells = expand(small_grid());
  cells.front().config.population = 3;  // too small for committee plus feeders
  const auto results = run_cells_serial(cells);
  EXPECT_TRUE(results.front().error.has_value());
  EXPECT_FALSE(results.back().error.has_value());
}

TEST(Experiment, WritesAllArtifactsDeterministically) {
  RunConfig c;
  c.population = 60;
  c.feeders_per_round = 10;
  c.rounds = 5;
  const auto base = fs::temp_directory_path() / "oraclesim_experiment_test";
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  c.output.dir = (base / "a").string();
  run_experiment(c);
  c.output.dir = (base / "b").string();
  const auto out = run_experiment(c);
  EXPECT_EQ(out.files.size(), 4u);
  for (const char* name : {"config.yaml", "trace.ndjson", "metrics.csv", "metrics.json"}) {
    const auto a = read(base / "a" / name);
    EXPECT_FALSE(a.empty()) << name;
    // Only config.yaml records the output directory itself.
    if (std::string(name) != "config.yaml") EXPECT_EQ(a, read(base / "b" / name)) << name;
  }
  fs::remove_all(base);
}

}  // namespace
}  // namespace oraclesim::experiment
