#include "oraclesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "oraclesim/errors.hpp"
#include "oraclesim/kernels.hpp"

namespace oraclesim::metrics {

double histogram_entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

std::optional<double> deviation_entropy(std::span<const ScoredReport> reports, std::uint32_t bins,
                                        double range_bound) {
  if (bins == 0) throw DomainError("bins must be positive");
  if (!(range_bound > 0.0)) throw DomainError("range bound must be positive");
  if (reports.empty()) return std::nullopt;
  std::vector<double> values;
  std::vector<double> truths;
  values.reserve(reports.size());
  truths.reserve(reports.size());
  for (const auto& r : reports) {
    values.push_back(r.value);
    truths.push_back(r.truth);
  }
  const auto counts = kernels::deviation_histogram_parallel(values, truths, bins, range_bound);
  return histogram_entropy(counts);
}

std::optional<double> detection_success_rate(std::span<const committee::Verdict> verdicts,
                                             std::span<const NodeId> acted_maliciously) {
  if (acted_maliciously.empty()) return std::nullopt;
  std::set<NodeId> failed;
  for (const auto& v : verdicts) {
    if (v.outcome == selection::Outcome::Failed) failed.insert(v.node_id);
  }
  const std::set<NodeId> acted(acted_maliciously.begin(), acted_maliciously.end());
  std::size_t caught = 0;
  for (NodeId id : acted) caught += failed.contains(id) ? 1 : 0;
  return static_cast<double>(caught) / static_cast<double>(acted.size());
}

std::optional<double> feed_accuracy(std::span<const ScoredReport> reports, double tolerance) {
  if (reports.empty()) return std::nullopt;
  std::size_t within = 0;
  for (const auto& r : reports) within += std::fabs(r.value - r.truth) <= tolerance ? 1 : 0;
  return static_cast<double>(within) / static_cast<double>(reports.size());
}

RoundMetrics summarize_round(std::span<const ScoredReport> reports, std::span<const committee::Verdict> verdicts,
                             std::span<const NodeId> acted_maliciously,
                             const std::function<bool(NodeId)>& is_malicious, double tolerance, std::uint32_t bins,
                             double range_bound) {
  RoundMetrics m;
  m.entropy = deviation_entropy(reports, bins, range_bound);
  m.feed_accuracy = feed_accuracy(reports, tolerance);
  // Only nodes that were tested count toward detection.
  std::set<NodeId> tested;
  for (const auto& v : verdicts) tested.insert(v.node_id);
  std::vector<NodeId> acted_tested;
  for (NodeId id : acted_maliciously) {
    if (tested.contains(id)) acted_tested.push_back(id);
  }
  m.detection_success_rate = detection_success_rate(verdicts, acted_tested);
  m.true_malicious_active = acted_maliciously.size();
  std::set<NodeId> detected;
  for (const auto& v : verdicts) {
    if (v.outcome == selection::Outcome::Failed && is_malicious(v.node_id)) detected.insert(v.node_id);
  }
  m.malicious_detected = detected.size();
  return m;
}

namespace {

std::string format_real(const std::optional<double>& v) {
  if (!v) return {};
  std::ostringstream out;
  out << std::setprecision(17) << *v;
  return out.str();
}

// Fields here never contain commas or quotes except run ids, which are quoted
// when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void write_csv(std::ostream& out, std::span<const RoundMetrics> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.run_id) << ',' << csv_field(r.strategy) << ',' << csv_field(r.alpha_band) << ',' << r.seed
        << ',' << r.round << ',' << format_real(r.entropy) << ',' << format_real(r.detection_success_rate) << ','
        << format_real(r.feed_accuracy) << ',' << r.true_malicious_active << ',' << r.malicious_detected << '\n';
  }
}

void write_json(std::ostream& out, std::span<const RoundMetrics> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"run_id", r.run_id},
                   {"strategy", r.strategy},
                   {"alpha_band", r.alpha_band},
                   {"seed", r.seed},
                   {"round", r.round},
                   {"entropy", optional_json(r.entropy)},
                   {"detection_success_rate", optional_json(r.detection_success_rate)},
                   {"feed_accuracy", optional_json(r.feed_accuracy)},
                   {"true_malicious_active", r.true_malicious_active},
                   {"malicious_detected", r.malicious_detected}});
  }
  out << arr.dump(2) << '\n';
}

std::vector<RoundMetrics> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("metrics CSV is empty");
  const auto header = split_csv_line(line);
  const auto expected = split_csv_line(kCsvHeader);
  if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw std::runtime_error("metrics CSV header does not match the schema");
  }
  std::vector<RoundMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw std::runtime_error("metrics CSV row has the wrong number of fields");
    RoundMetrics r;
    r.run_id = f[0];
    r.strategy = f[1];
    r.alpha_band = f[2];
    r.seed = std::stoull(f[3]);
    r.round = std::stoull(f[4]);
    r.entropy = parse_real(f[5]);
    r.detection_success_rate = parse_real(f[6]);
    r.feed_accuracy = parse_real(f[7]);
    r.true_malicious_active = std::stoull(f[8]);
    r.malicious_detected = std::stoull(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void export_metrics(std::span<const RoundMetrics> rows, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (format == Format::Csv) {
    write_csv(out, rows);
  } else {
    write_json(out, rows);
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<std::optional<double>> block_means(std::span<const RoundMetrics> rows, std::size_t block) {
  if (block == 0) throw DomainError("block size must be positive");
  std::vector<std::optional<double>> out;
  for (std::size_t start = 0; start < rows.size(); start += block) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = start; i < std::min(rows.size(), start + block); ++i) {
      if (rows[i].detection_success_rate) {
        sum += *rows[i].detection_success_rate;
        ++count;
      }
    }
    out.push_back(count == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(count)));
  }
  return out;
}

}  // namespace oraclesim::metrics
