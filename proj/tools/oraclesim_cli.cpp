// oraclesim: command-line front end.
//
//   oraclesim run           one simulation, writes metrics/trace/config
//   oraclesim sweep         grid of runs, writes a combined CSV
//   oraclesim coverage-plan rounds and cycles needed for test coverage
//   oraclesim replay        recompute metrics from a trace
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oraclesim/config.hpp"
#include "oraclesim/coverage.hpp"
#include "oraclesim/errors.hpp"
#include "oraclesim/experiment.hpp"
#include "oraclesim/metrics.hpp"
#include "oraclesim/simulation.hpp"
#include "oraclesim/snapshot.hpp"
#include "oraclesim/trace.hpp"

namespace {

using namespace oraclesim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Flags shared by `run` and `sweep` that mirror RunConfig fields.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> population, feeders, rounds, seed, committee_size, cycle, tests_per_round;
  std::optional<double> malicious_fraction, misbehavior;
  std::optional<std::string> strategy, alpha_band, out, run_id, rt_orientation;
  std::optional<std::uint32_t> theta_prov, theta_black;
  bool no_trace = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "YAML run configuration")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override any field: dotted.key=value (repeatable)");
    app->add_option("--population", population, "Node population M");
    app->add_option("-n,--feeders", feeders, "Feeders per round n");
    app->add_option("-s,--malicious-fraction", malicious_fraction, "Malicious fraction s");
    app->add_option("--misbehavior-probability", misbehavior, "Per-round misbehavior probability");
    app->add_option("--rounds", rounds, "Number of rounds");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--strategy", strategy, "dectest | weighted_random | pure_random | dos_like");
    app->add_option("--alpha-band", alpha_band, "Alpha band as lo-hi, e.g. 0.1-0.3");
    app->add_option("--committee-size", committee_size, "Committee size");
    app->add_option("--cycle", cycle, "Committee rotation interval (rounds)");
    app->add_option("--tests-per-round", tests_per_round, "Covert tests per round (0 = one per feeder)");
    app->add_option("--theta-prov", theta_prov, "Strikes tolerated before provisional status");
    app->add_option("--theta-black", theta_black, "Strikes tolerated before blacklisting");
    app->add_option("--rt-orientation", rt_orientation, "literal | inverted");
    app->add_option("-o,--out", out, "Output directory");
    app->add_option("--run-id", run_id, "Run identifier written to metrics");
    app->add_flag("--no-trace", no_trace, "Skip the NDJSON trace");
  }

  RunConfig resolve() const {
    RunConfig config = config_file.empty() ? RunConfig{} : load_config_file(config_file);
    std::vector<std::string> a;
    auto put = [&](const char* key, const auto& v) {
      if (!v) return;
      std::ostringstream s;
      s << key << '=';
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) {
        s << format_number(*v);
      } else {
        s << *v;
      }
      a.push_back(s.str());
    };
    put("population", population);
    put("feeders_per_round", feeders);
    put("malicious_fraction", malicious_fraction);
    put("misbehavior_probability", misbehavior);
    put("rounds", rounds);
    put("seed", seed);
    put("strategy", strategy);
    put("alpha_band", alpha_band);
    put("committee.size", committee_size);
    put("committee.cycle", cycle);
    put("committee.tests_per_round", tests_per_round);
    put("ledger.provisional_threshold", theta_prov);
    put("ledger.blacklist_threshold", theta_black);
    put("reputation.rt_orientation", rt_orientation);
    put("output.dir", out);
    if (run_id) a.push_back("output.run_id=\"" + *run_id + "\"");
    if (no_trace) a.push_back("output.trace=false");
    a.insert(a.end(), sets.begin(), sets.end());
    apply_overrides(config, a);
    config.validate();
    return config;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_run(const ConfigFlags& flags, const std::optional<std::string>& resume,
            const std::optional<std::uint64_t>& snapshot_at, const std::string& snapshot_path) {
  if (resume) {
    std::ofstream trace_file;
    auto sim = snapshot::load(*resume);
    const auto dir = flags.out.value_or(sim.config().output.dir);
    std::filesystem::create_directories(dir);
    while (!sim.finished()) sim.run_round();
    metrics::export_metrics(sim.metrics(), metrics::Format::Csv, dir + "/metrics.csv");
    metrics::export_metrics(sim.metrics(), metrics::Format::Json, dir + "/metrics.json");
    std::cout << "resumed " << sim.config().run_label() << ": " << sim.metrics().size() << " rounds -> " << dir
              << "\n";
    return kExitOk;
  }
  const auto config = flags.resolve();
  if (snapshot_at) {
    if (*snapshot_at > config.rounds) throw ValidationError({"--snapshot-at: beyond the configured rounds"});
    Simulation sim(config);
    while (sim.next_round() < *snapshot_at) sim.run_round();
    std::filesystem::create_directories(config.output.dir);
    const auto path = snapshot_path.empty() ? config.output.dir + "/snapshot.json" : snapshot_path;
    snapshot::save(sim, path);
    std::cout << "snapshot after " << *snapshot_at << " rounds -> " << path << "\n";
    return kExitOk;
  }
  const auto out = experiment::run_experiment(config);
  std::cout << config.run_label() << ": " << out.result.metrics.size() << " rounds, alpha=" << out.result.alpha
            << "\n";
  for (const auto& f : out.files) std::cout << "  " << f << "\n";
  return kExitOk;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& grid_file, const std::string& n_list,
              const std::string& s_list, const std::string& band_list, const std::string& strategy_list,
              const std::string& seed_list) {
  experiment::GridSpec grid;
  if (!grid_file.empty()) {
    grid = experiment::load_grid_file(grid_file);
    // Flags still override the grid's base configuration.
    std::vector<std::string> overrides = flags.sets;
    if (flags.out) overrides.push_back("output.dir=" + *flags.out);
    if (flags.rounds) overrides.push_back("rounds=" + std::to_string(*flags.rounds));
    apply_overrides(grid.base, overrides);
  } else {
    grid.base = flags.resolve();
    grid.feeders = {grid.base.feeders_per_round};
    grid.malicious_fractions = {grid.base.malicious_fraction};
    grid.alpha_bands = {grid.base.alpha_band};
    grid.strategies = {grid.base.strategy};
    grid.seeds = {grid.base.seed};
  }
  std::vector<std::string> problems;
  if (!n_list.empty()) {
    grid.feeders.clear();
    for (const auto& v : split_list(n_list)) grid.feeders.push_back(std::stoull(v));
  }
  if (!s_list.empty()) {
    grid.malicious_fractions.clear();
    for (const auto& v : split_list(s_list)) grid.malicious_fractions.push_back(std::stod(v));
  }
  if (!band_list.empty()) {
    grid.alpha_bands.clear();
    for (const auto& v : split_list(band_list)) {
      RunConfig tmp;
      apply_overrides(tmp, {"alpha_band=" + v});
      grid.alpha_bands.push_back(tmp.alpha_band);
    }
  }
  if (!strategy_list.empty()) {
    grid.strategies.clear();
    for (const auto& v : split_list(strategy_list)) {
      auto s = strategy_from_string(v);
      if (!s) problems.push_back("--strategies: unknown strategy '" + v + "'");
      else grid.strategies.push_back(*s);
    }
  }
  if (!seed_list.empty()) {
    grid.seeds.clear();
    for (const auto& v : split_list(seed_list)) grid.seeds.push_back(std::stoull(v));
  }
  if (!problems.empty()) throw ValidationError(problems);

  const auto out = experiment::run_sweep(grid);
  std::cout << out.cells << " cells (" << out.failed << " failed) -> " << out.path << "\n";
  return out.failed == 0 ? kExitOk : kExitRuntime;
}

int cmd_coverage(std::uint64_t m, std::uint64_t n, double p, double x, double g, double c, std::uint64_t trials,
                 std::uint64_t seed, bool as_json) {
  const auto plan = coverage::plan(m, n, p, x, g, c);
  std::optional<double> empirical;
  if (trials > 0) empirical = coverage::empirical_coverage(m, n, plan.rounds, trials, seed);
  if (as_json) {
    nlohmann::json j = {{"population", plan.population}, {"sample_size", plan.sample_size},
                        {"confidence", plan.confidence}, {"rounds", plan.rounds},
                        {"tests_per_cycle", plan.tests_per_cycle}, {"tx_per_second", plan.tx_per_second},
                        {"cycle_capacity", plan.cycle_capacity}, {"cycles", plan.cycles}};
    if (empirical) j["empirical_coverage"] = *empirical;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "rounds K = " << plan.rounds << "\ncycles N_T = " << plan.cycles << "\n";
    if (empirical) std::cout << "empirical coverage at K (" << trials << " trials) = " << *empirical << "\n";
  }
  return kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& out, const std::string& format) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open trace " + trace_path);
  const auto rows = trace::replay(in);
  if (out.empty()) {
    if (format == "json") metrics::write_json(std::cout, rows);
    else metrics::write_csv(std::cout, rows);
  } else {
    metrics::export_metrics(rows, format == "json" ? metrics::Format::Json : metrics::Format::Csv, out);
    std::cerr << rows.size() << " rounds -> " << out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covert-testing oracle network simulator"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  std::optional<std::string> resume;
  std::optional<std::uint64_t> snapshot_at;
  std::string snapshot_path;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run_flags.attach(run);
  run->add_option("--snapshot-at", snapshot_at, "Stop after this many rounds and save a snapshot");
  run->add_option("--snapshot", snapshot_path, "Snapshot file for --snapshot-at");
  run->add_option("--resume", resume, "Continue a saved snapshot to the end")->check(CLI::ExistingFile);

  ConfigFlags sweep_flags;
  std::string grid_file, n_list, s_list, band_list, strategy_list, seed_list;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep_flags.attach(sweep);
  sweep->add_option("--grid", grid_file, "YAML grid specification")->check(CLI::ExistingFile);
  sweep->add_option("--n-values", n_list, "Comma list of feeders per round");
  sweep->add_option("--s-values", s_list, "Comma list of malicious fractions");
  sweep->add_option("--alpha-bands", band_list, "Comma list of alpha bands lo-hi");
  sweep->add_option("--strategies", strategy_list, "Comma list of strategies");
  sweep->add_option("--seeds", seed_list, "Comma list of master seeds");

  std::uint64_t cov_m = 500, cov_n = 50, cov_trials = 0, cov_seed = 1;
  double cov_p = 0.95, cov_x = 1.0, cov_g = 1.0, cov_c = 1.0;
  bool cov_json = false;
  auto* cov = app.add_subcommand("coverage-plan", "Rounds/cycles for probabilistic test coverage");
  cov->add_option("-M,--population", cov_m, "Population M");
  cov->add_option("-N,--sample", cov_n, "Nodes tested per round N");
  cov->add_option("-P,--confidence", cov_p, "Coverage confidence P in [0, 1)");
  cov->add_option("-X,--tests-per-cycle", cov_x, "Test transactions per cycle X");
  cov->add_option("-G,--tx-per-second", cov_g, "Transactions per second G");
  cov->add_option("-C,--cycle-capacity", cov_c, "Cycle capacity C");
  cov->add_option("--trials", cov_trials, "Monte Carlo trials for an empirical check (0 = skip)");
  cov->add_option("--seed", cov_seed, "Monte Carlo seed");
  cov->add_flag("--json", cov_json, "Emit JSON");

  std::string trace_path, replay_out, replay_format = "csv";
  auto* rep = app.add_subcommand("replay", "Recompute metrics from a trace");
  rep->add_option("trace", trace_path, "NDJSON trace file")->required()->check(CLI::ExistingFile);
  rep->add_option("-o,--out", replay_out, "Output file (default stdout)");
  rep->add_option("--format", replay_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags, resume, snapshot_at, snapshot_path);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_flags, grid_file, n_list, s_list, band_list, strategy_list, seed_list);
    }
    if (cov->parsed()) {
      return cmd_coverage(cov_m, cov_n, cov_p, cov_x, cov_g, cov_c, cov_trials, cov_seed, cov_json);
    }
    if (rep->parsed()) return cmd_replay(trace_path, replay_out, replay_format);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad value (" << e.what() << ")\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
