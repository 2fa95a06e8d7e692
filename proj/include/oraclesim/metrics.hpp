#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oraclesim/committee.hpp"
#include "oraclesim/domain.hpp"

namespace oraclesim::metrics {

struct RoundMetrics {
  std::string run_id;
  std::string strategy;
  std::string alpha_band;
  std::uint64_t seed = 0;
  std::uint64_t round = 0;  // 1-based
  std::optional<double> entropy;
  std::optional<double> detection_success_rate;
  std::optional<double> feed_accuracy;
  std::uint64_t true_malicious_active = 0;
  std::uint64_t malicious_detected = 0;

  friend bool operator==(const RoundMetrics&, const RoundMetrics&) = default;
};

// A report paired with the ground truth for its query.
struct ScoredReport {
  double value = 0.0;
  double truth = 0.0;
};

// Shannon entropy (bits) of |value - truth| binned into `bins` equal bins
// over [0, range_bound]; deviations past the range land in the last bin.
// Empty input has no defined entropy.
std::optional<double> deviation_entropy(std::span<const ScoredReport> reports, std::uint32_t bins,
                                        double range_bound);

// Entropy of a count histogram, skipping empty bins.
double histogram_entropy(std::span<const std::uint64_t> counts);

// Fraction of actually-falsifying tested nodes whose verdict failed. Undefined
// when no tested node falsified.
std::optional<double> detection_success_rate(std::span<const committee::Verdict> verdicts,
                                             std::span<const NodeId> acted_maliciously);

// Fraction of reports within tolerance of the truth.
std::optional<double> feed_accuracy(std::span<const ScoredReport> reports, double tolerance);

// Per-round quantities from one round's observations. Labels are left empty.
RoundMetrics summarize_round(std::span<const ScoredReport> reports, std::span<const committee::Verdict> verdicts,
                             std::span<const NodeId> acted_maliciously,
                             const std::function<bool(NodeId)>& is_malicious, double tolerance, std::uint32_t bins,
                             double range_bound);

// Exact CSV header of the metrics contract.
inline constexpr const char* kCsvHeader =
    "run_id,strategy,alpha_band,seed,round,entropy,detection_success_rate,feed_accuracy,true_malicious_active,"
    "malicious_detected";

void write_csv(std::ostream& out, std::span<const RoundMetrics> rows);
void write_json(std::ostream& out, std::span<const RoundMetrics> rows);
std::vector<RoundMetrics> read_csv(std::istream& in);

enum class Format : std::uint8_t { Csv, Json };
// Writes to `path`; I/O failures throw std::runtime_error naming the path.
void export_metrics(std::span<const RoundMetrics> rows, Format format, const std::string& path);

// Mean detection rate per block of `block` rounds (undefined rounds skipped).
std::vector<std::optional<double>> block_means(std::span<const RoundMetrics> rows, std::size_t block);

}  // namespace oraclesim::metrics
