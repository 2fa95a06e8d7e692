#include "oraclesim/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include "oraclesim/errors.hpp"
#include "oraclesim/rng.hpp"
#include "oraclesim/trace.hpp"

namespace oraclesim::experiment {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

ExperimentOutput run_experiment(const RunConfig& config) {
  config.validate();
  ExperimentOutput out;
  out.dir = config.output.dir;
  ensure_dir(out.dir);

  const auto config_path = (fs::path(out.dir) / "config.yaml").string();
  write_text(config_path, to_yaml(config));
  out.files.push_back(config_path);

  std::ofstream trace_file;
  TraceSink sink;
  if (config.output.trace) {
    const auto trace_path = (fs::path(out.dir) / "trace.ndjson").string();
    trace_file.open(trace_path, std::ios::binary);
    if (!trace_file) throw std::runtime_error("cannot open " + trace_path + " for writing");
    sink = trace::ndjson_sink(trace_file);
    out.files.push_back(trace_path);
  }
  out.result = run_simulation(config, sink);
  if (trace_file.is_open()) {
    trace_file.flush();
    if (!trace_file) throw std::runtime_error("write failed for trace.ndjson");
  }

  if (config.output.csv) {
    const auto path = (fs::path(out.dir) / "metrics.csv").string();
    metrics::export_metrics(out.result.metrics, metrics::Format::Csv, path);
    out.files.push_back(path);
  }
  if (config.output.json) {
    const auto path = (fs::path(out.dir) / "metrics.json").string();
    metrics::export_metrics(out.result.metrics, metrics::Format::Json, path);
    out.files.push_back(path);
  }
  return out;
}

void GridSpec::validate() const {
  std::vector<std::string> problems;
  if (feeders.empty()) problems.push_back("grid.feeders_per_round: must not be empty");
  if (malicious_fractions.empty()) problems.push_back("grid.malicious_fraction: must not be empty");
  if (alpha_bands.empty()) problems.push_back("grid.alpha_band: must not be empty");
  if (strategies.empty()) problems.push_back("grid.strategy: must not be empty");
  if (seeds.empty()) problems.push_back("grid.seeds: must not be empty");
  if (!problems.empty()) throw ValidationError(std::move(problems));
  // Each cell must be a valid run on its own.
  for (const auto& cell : expand(*this)) {
    try {
      cell.config.validate();
    } catch (const ValidationError& e) {
      for (const auto& p : e.problems()) problems.push_back(cell.label + ": " + p);
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

GridSpec parse_grid_text(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ValidationError({std::string("grid: ") + e.what()});
  }
  GridSpec grid;
  if (!root.IsNull() && !root.IsMap()) throw ValidationError({"grid: top level must be a mapping"});
  std::vector<std::string> problems;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "base" && key != "grid") problems.push_back("unknown key: " + key);
  }
  if (root["base"]) {
    YAML::Emitter e;
    e << root["base"];
    try {
      grid.base = parse_config_text(e.c_str());
    } catch (const ValidationError& err) {
      for (const auto& p : err.problems()) problems.push_back("base." + p);
    }
  }
  const auto g = root["grid"];
  auto read = [&](const char* key, auto fn) {
    if (!g || !g[key]) return;
    if (!g[key].IsSequence()) {
      problems.push_back(std::string("grid.") + key + ": expected a list");
      return;
    }
    for (const auto& item : g[key]) {
      try {
        fn(item);
      } catch (const YAML::Exception&) {
        problems.push_back(std::string("grid.") + key + ": bad entry");
      }
    }
  };
  if (g) {
    for (const auto& kv : g) {
      const auto key = kv.first.as<std::string>();
      if (key != "feeders_per_round" && key != "malicious_fraction" && key != "alpha_band" && key != "strategy" &&
          key != "seeds") {
        problems.push_back("unknown key: grid." + key);
      }
    }
  }
  read("feeders_per_round", [&](const YAML::Node& n) { grid.feeders.push_back(n.as<std::uint64_t>()); });
  read("malicious_fraction", [&](const YAML::Node& n) { grid.malicious_fractions.push_back(n.as<double>()); });
  read("alpha_band", [&](const YAML::Node& n) {
    RunConfig tmp;
    YAML::Emitter e;
    e << YAML::BeginMap << YAML::Key << "alpha_band" << YAML::Value << n << YAML::EndMap;
    try {
      tmp = parse_config_text(e.c_str());
      grid.alpha_bands.push_back(tmp.alpha_band);
    } catch (const ValidationError& err) {
      problems.push_back("grid." + err.problems().front());
    }
  });
  read("strategy", [&](const YAML::Node& n) {
    const auto s = n.as<std::string>();
    if (auto parsed = strategy_from_string(s)) {
      grid.strategies.push_back(*parsed);
    } else {
      problems.push_back("grid.strategy: unknown strategy '" + s + "'");
    }
  });
  read("seeds", [&](const YAML::Node& n) { grid.seeds.push_back(n.as<std::uint64_t>()); });
  if (!problems.empty()) throw ValidationError(std::move(problems));

  if (grid.feeders.empty()) grid.feeders.push_back(grid.base.feeders_per_round);
  if (grid.malicious_fractions.empty()) grid.malicious_fractions.push_back(grid.base.malicious_fraction);
  if (grid.alpha_bands.empty()) grid.alpha_bands.push_back(grid.base.alpha_band);
  if (grid.strategies.empty()) grid.strategies.push_back(grid.base.strategy);
  if (grid.seeds.empty()) grid.seeds.push_back(grid.base.seed);
  return grid;
}

GridSpec load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"grid: cannot read " + path});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid_text(buf.str());
}

std::vector<Cell> expand(const GridSpec& grid) {
  std::vector<Cell> cells;
  for (auto strategy : grid.strategies) {
    for (const auto& band : grid.alpha_bands) {
      for (auto n : grid.feeders) {
        for (double s : grid.malicious_fractions) {
          for (auto seed : grid.seeds) {
            Cell c;
            c.master_seed = seed;
            c.config = grid.base;
            c.config.strategy = strategy;
            c.config.alpha_band = band;
            c.config.feeders_per_round = n;
            c.config.malicious_fraction = s;
            const std::string shape = "n=" + std::to_string(n) + ";s=" + format_number(s);
            c.config.seed = derive_seed(seed, shape);
            c.label = std::string(to_string(strategy)) + ";a=" + band.label() + ";" + shape +
                      ";seed=" + std::to_string(seed);
            c.config.output.run_id = c.label;
            c.config.output.trace = false;
            cells.push_back(std::move(c));
          }
        }
      }
    }
  }
  return cells;
}

CellResult run_cell(const Cell& cell) {
  CellResult r;
  r.label = cell.label;
  r.feeders = cell.config.feeders_per_round;
  r.malicious_fraction = cell.config.malicious_fraction;
  try {
    r.metrics = run_simulation(cell.config).metrics;
  } catch (const std::exception& e) {
    r.metrics.clear();
    r.error = e.what();
  }
  return r;
}

std::vector<CellResult> run_cells_serial(const std::vector<Cell>& cells) {
  std::vector<CellResult> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) out[i] = run_cell(cells[i]);
  return out;
}

std::vector<CellResult> run_cells_parallel(const std::vector<Cell>& cells) {
  std::vector<CellResult> out(cells.size());
  const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_cell(cells[static_cast<std::size_t>(i)]);
  }
  return out;
}

void write_combined_csv(std::ostream& out, std::vector<CellResult> results) {
  struct Row {
    const metrics::RoundMetrics* m;
    std::uint64_t n;
    double s;
  };
  std::vector<Row> rows;
  for (const auto& r : results) {
    for (const auto& m : r.metrics) rows.push_back({&m, r.feeders, r.malicious_fraction});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.m->strategy, a.m->alpha_band, a.n, a.s, a.m->run_id, a.m->round) <
           std::tie(b.m->strategy, b.m->alpha_band, b.n, b.s, b.m->run_id, b.m->round);
  });
  std::ostringstream body;
  std::vector<metrics::RoundMetrics> single(1);
  out << metrics::kCsvHeader << ',' << kCombinedExtraColumns << '\n';
  for (const auto& row : rows) {
    single[0] = *row.m;
    std::ostringstream line;
    metrics::write_csv(line, single);
    auto text = line.str();
    // Drop the header and trailing newline of the single-row rendering.
    text = text.substr(text.find('\n') + 1);
    text.pop_back();
    out << text << ',' << row.n << ',' << format_number(row.s) << '\n';
  }
}

std::string grid_yaml(const GridSpec& grid) {
  std::string out = "base:\n";
  std::istringstream base(to_yaml(grid.base));
  for (std::string line; std::getline(base, line);) out += "  " + line + "\n";
  auto list = [](const auto& items, auto render) {
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + render(items[i]);
    return s + "]";
  };
  out += "grid:\n";
  out += "  feeders_per_round: " + list(grid.feeders, [](std::uint64_t v) { return std::to_string(v); }) + "\n";
  out += "  malicious_fraction: " + list(grid.malicious_fractions, [](double v) { return format_number(v); }) + "\n";
  out += "  alpha_band: " + list(grid.alpha_bands, [](const AlphaBand& b) {
           return "[" + format_number(b.lo) + ", " + format_number(b.hi) + "]";
         }) + "\n";
  out += "  strategy: " + list(grid.strategies, [](Strategy s) { return std::string(to_string(s)); }) + "\n";
  out += "  seeds: " + list(grid.seeds, [](std::uint64_t v) { return std::to_string(v); }) + "\n";
  return out;
}

SweepOutput run_sweep(const GridSpec& grid) {
  grid.validate();
  const auto cells = expand(grid);
  SweepOutput out;
  out.cells = cells.size();
  out.results = run_cells_parallel(cells);
  ensure_dir(grid.base.output.dir);

  out.path = (fs::path(grid.base.output.dir) / "sweep.csv").string();
  std::ostringstream csv;
  write_combined_csv(csv, out.results);
  write_text(out.path, csv.str());

  nlohmann::json summary = nlohmann::json::array();
  std::vector<const CellResult*> ordered;
  for (const auto& r : out.results) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->label < b->label; });
  for (const auto* r : ordered) {
    if (r->error) ++out.failed;
    summary.push_back({{"label", r->label},
                       {"rows", r->metrics.size()},
                       {"status", r->error ? "failed" : "ok"},
                       {"error", r->error ? nlohmann::json(*r->error) : nlohmann::json()}});
  }
  write_text((fs::path(grid.base.output.dir) / "sweep_cells.json").string(), summary.dump(2) + "\n");
  write_text((fs::path(grid.base.output.dir) / "config.yaml").string(), to_yaml(grid.base));
  write_text((fs::path(grid.base.output.dir) / "grid.yaml").string(), grid_yaml(grid));
  return out;
}

std::vector<SweepRow> read_combined_csv(std::istream& in) {
  std::stringstream all;
  all << in.rdbuf();
  const auto text = all.str();
  std::istringstream base(text);
  const auto metrics_rows = metrics::read_csv(base);

  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::vector<SweepRow> out;
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto last = line.rfind(',');
    const auto prev = line.rfind(',', last - 1);
    SweepRow row;
    row.metrics = metrics_rows.at(i++);
    row.feeders = std::stoull(line.substr(prev + 1, last - prev - 1));
    row.malicious_fraction = std::stod(line.substr(last + 1));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace oraclesim::experiment
