#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oraclesim/config.hpp"
#include "oraclesim/metrics.hpp"
#include "oraclesim/simulation.hpp"

namespace oraclesim::experiment {

struct ExperimentOutput {
  std::string dir;
  std::vector<std::string> files;
  SimulationResult result;
};

// Runs one simulation and writes metrics (CSV/JSON), the trace and the
// effective config into config.output.dir.
ExperimentOutput run_experiment(const RunConfig& config);

struct GridSpec {
  RunConfig base;
  std::vector<std::uint64_t> feeders;
  std::vector<double> malicious_fractions;
  std::vector<AlphaBand> alpha_bands;
  std::vector<Strategy> strategies;
  std::vector<std::uint64_t> seeds;

  void validate() const;
};

// YAML: { base: <config mapping>, grid: { feeders_per_round: [...],
// malicious_fraction: [...], alpha_band: [[lo, hi], ...], strategy: [...],
// seeds: [...] } }. Missing grid axes default to the base value.
GridSpec parse_grid_text(const std::string& yaml);
GridSpec load_grid_file(const std::string& path);

struct Cell {
  std::string label;          // every axis, used as run_id
  std::uint64_t master_seed = 0;
  RunConfig config;           // config.seed is the derived cell seed
};

// Cell seed = derive_seed(master, "n=<n>;s=<s>"): cells that differ only in
// strategy or alpha band share a population and data stream.
std::vector<Cell> expand(const GridSpec& grid);

struct CellResult {
  std::string label;
  std::uint64_t feeders = 0;
  double malicious_fraction = 0.0;
  std::vector<metrics::RoundMetrics> metrics;
  std::optional<std::string> error;
};

CellResult run_cell(const Cell& cell);
std::vector<CellResult> run_cells_serial(const std::vector<Cell>& cells);
std::vector<CellResult> run_cells_parallel(const std::vector<Cell>& cells);

// Metrics rows plus feeders_per_round and malicious_fraction columns, sorted
// by (strategy, alpha_band, n, s, seed, round).
void write_combined_csv(std::ostream& out, std::vector<CellResult> results);

inline constexpr const char* kCombinedExtraColumns = "feeders_per_round,malicious_fraction";

struct SweepOutput {
  std::string path;
  std::size_t cells = 0;
  std::size_t failed = 0;
  std::vector<CellResult> results;
};

// Grid rendered in the format parse_grid_text reads.
std::string grid_yaml(const GridSpec& grid);

// Runs every cell (concurrently) and writes sweep.csv, sweep_cells.json,
// config.yaml (the base) and grid.yaml into grid.base.output.dir.
SweepOutput run_sweep(const GridSpec& grid);

// Reads a combined sweep CSV back.
struct SweepRow {
  metrics::RoundMetrics metrics;
  std::uint64_t feeders = 0;
  double malicious_fraction = 0.0;
};
std::vector<SweepRow> read_combined_csv(std::istream& in);

}  // namespace oraclesim::experiment
