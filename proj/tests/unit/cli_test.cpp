// Exit codes and file contracts of the oraclesim binary.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oraclesim/config.hpp"
#include "oraclesim/metrics.hpp"

namespace fs = std::filesystem;
using namespace oraclesim;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oraclesim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd =
        std::string(ORACLESIM_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  // Small enough to finish quickly, large enough to be valid.
  std::string small(const std::string& sub) const {
    return sub + " --population 80 -n 10 --committee-size 5 --rounds 5 --cycle 3";
  }

  fs::path dir_;
};

std::vector<metrics::RoundMetrics> read_rows(const std::string& path) {
  std::ifstream in(path);
  return metrics::read_csv(in);
}

TEST_F(Cli, RunWritesAllOutputs) {
  const auto o = run(small("run") + " -o " + (dir_ / "r").string());
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"config.yaml", "trace.ndjson", "metrics.csv", "metrics.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "r" / f)) << f;
  }
  EXPECT_EQ(read_rows((dir_ / "r" / "metrics.csv").string()).size(), 5u);
}

TEST_F(Cli, EmptyConfigFileMeansDefaults) {
  std::ofstream(dir_ / "empty.yaml").close();
  const auto o = run("run -c " + (dir_ / "empty.yaml").string() + " --rounds 2 --no-trace -o " +
                     (dir_ / "r").string());
  ASSERT_EQ(o.code, 0) << o.err;
  auto echoed = load_config_file((dir_ / "r" / "config.yaml").string());
  RunConfig expected;
  expected.rounds = 2;
  expected.output.trace = false;
  expected.output.dir = (dir_ / "r").string();
  EXPECT_EQ(to_yaml(echoed), to_yaml(expected));
}

TEST_F(Cli, OutOfRangeFractionIsValidationError) {
  const auto o = run(small("run") + " -s 1.5 -o " + (dir_ / "r").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("malicious_fraction"), std::string::npos) << o.err;
  EXPECT_FALSE(fs::exists(dir_ / "r" / "metrics.csv"));
}

TEST_F(Cli, UnknownKeyIsValidationError) {
  const auto o = run(small("run") + " --set committee.sise=4 -o " + (dir_ / "r").string());
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("committee.sise"), std::string::npos) << o.err;
}

TEST_F(Cli, BadArgumentsAreValidationErrors) {
  EXPECT_EQ(run("run --no-such-flag").code, 1);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("run --rounds notanumber").code, 1);
  EXPECT_EQ(run("replay " + (dir_ / "missing.ndjson").string()).code, 1);
  EXPECT_EQ(run("coverage-plan -P 1.0").code, 1);
}

TEST_F(Cli, GarbageTraceIsRuntimeError) {
  std::ofstream(dir_ / "bad.ndjson") << "{\"event\":\"round_begin\",\"round\":1}\n";
  EXPECT_EQ(run("replay " + (dir_ / "bad.ndjson").string()).code, 2);
}

TEST_F(Cli, SeedFlagIsEchoed) {
  const auto o = run(small("run") + " --seed 4242 --no-trace -o " + (dir_ / "r").string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(load_config_file((dir_ / "r" / "config.yaml").string()).seed, 4242u);
}

TEST_F(Cli, ZeroRoundsGivesEmptyOutputs) {
  const auto o = run("run --population 80 -n 10 --committee-size 5 --rounds 0 -o " + (dir_ / "r").string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir_ / "r" / "metrics.csv"), std::string(metrics::kCsvHeader) + "\n");
  EXPECT_TRUE(read_rows((dir_ / "r" / "metrics.csv").string()).empty());
}

TEST_F(Cli, FixedSeedRerunIsByteIdentical) {
  ASSERT_EQ(run(small("run") + " --seed 9 -o " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run(small("run") + " --seed 9 -o " + (dir_ / "b").string()).code, 0);
  for (const char* f : {"trace.ndjson", "metrics.csv", "metrics.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}

TEST_F(Cli, ReplayReproducesMetrics) {
  ASSERT_EQ(run(small("run") + " -o " + (dir_ / "r").string()).code, 0);
  const auto o = run("replay " + (dir_ / "r" / "trace.ndjson").string() + " -o " + (dir_ / "replayed.csv").string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir_ / "replayed.csv"), slurp(dir_ / "r" / "metrics.csv"));
}

TEST_F(Cli, SnapshotResumeMatchesFullRun) {
  ASSERT_EQ(run(small("run") + " --no-trace -o " + (dir_ / "full").string()).code, 0);
  ASSERT_EQ(run(small("run") + " --no-trace --snapshot-at 2 --snapshot " + (dir_ / "snap.json").string() +
                " -o " + (dir_ / "part").string())
                .code,
            0);
  const auto o = run("run --resume " + (dir_ / "snap.json").string() + " -o " + (dir_ / "part").string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir_ / "part" / "metrics.csv"), slurp(dir_ / "full" / "metrics.csv"));
}

TEST_F(Cli, CoveragePlan) {
  const auto o = run("coverage-plan -M 500 -N 50 -P 0.95");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("rounds K = 29"), std::string::npos) << o.out;
  const auto j = run("coverage-plan -M 500 -N 50 -P 0.95 --json --trials 2000");
  ASSERT_EQ(j.code, 0);
  EXPECT_NE(j.out.find("\"rounds\": 29"), std::string::npos) << j.out;
  EXPECT_NE(j.out.find("empirical_coverage"), std::string::npos);
}

TEST_F(Cli, SweepWritesCombinedCsv) {
  const auto o = run(small("sweep") + " --no-trace --n-values 8,10 --s-values 0.1 --strategies dectest,pure_random "
                                      "--seeds 1 -o " + (dir_ / "s").string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(read_rows((dir_ / "s" / "sweep.csv").string()).size(), 4u * 5u);
  EXPECT_TRUE(fs::exists(dir_ / "s" / "grid.yaml"));
  EXPECT_EQ(run(small("sweep") + " --strategies nope -o " + (dir_ / "s2").string()).code, 1);
}

}  // namespace
