#pragma once

#include <iosfwd>
#include <vector>

#include "oraclesim/metrics.hpp"
#include "oraclesim/simulation.hpp"

namespace oraclesim::trace {

// Sink writing one compact JSON object per line.
TraceSink ndjson_sink(std::ostream& out);

// Sink appending events to a vector (tests, in-memory replay).
TraceSink collecting_sink(std::vector<nlohmann::json>& events);

// Recomputes per-round metrics from trace events alone. Throws
// std::runtime_error on a missing header or an unsupported schema version.
std::vector<metrics::RoundMetrics> replay(const std::vector<nlohmann::json>& events);
std::vector<metrics::RoundMetrics> replay(std::istream& ndjson);

}  // namespace oraclesim::trace
