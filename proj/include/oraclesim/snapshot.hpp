#pragma once

#include <string>

#include "oraclesim/simulation.hpp"

namespace oraclesim::snapshot {

// Snapshot files are pretty-printed JSON; see docs/formats.md.
void save(const Simulation& sim, const std::string& path);
Simulation load(const std::string& path, TraceSink trace = {});

}  // namespace oraclesim::snapshot
