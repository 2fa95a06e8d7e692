#include "oraclesim/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "oraclesim/errors.hpp"

namespace oraclesim::selection {

WeightTable::WeightTable(std::size_t node_count, double floor)
    : entries_(node_count), floor_(floor), present_(node_count) {
  if (!(floor > 0.0)) throw DomainError("weight floor must be positive");
  recompute_sum();
}

bool WeightTable::contains(NodeId id) const noexcept { return id < entries_.size() && entries_[id].present; }

const WeightTable::Entry& WeightTable::at(NodeId id) const {
  if (!contains(id)) throw LookupError("node " + std::to_string(id) + " not in weight table");
  return entries_[id];
}

WeightTable::Entry& WeightTable::at(NodeId id) {
  if (!contains(id)) throw LookupError("node " + std::to_string(id) + " not in weight table");
  return entries_[id];
}

double WeightTable::weight(NodeId id) const {
  const auto& e = at(id);
  return std::max(e.base * e.feedback, floor_);
}

double WeightTable::base(NodeId id) const { return at(id).base; }
double WeightTable::feedback(NodeId id) const { return at(id).feedback; }

std::vector<NodeId> WeightTable::selectable_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(present_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].present) ids.push_back(static_cast<NodeId>(i));
  }
  return ids;
}

void WeightTable::set_base(NodeId id, double base) {
  if (!(base > 0.0)) throw DomainError("weight base must be positive");
  at(id).base = base;
  recompute_sum();
}

void WeightTable::scale_feedback(NodeId id, double factor) {
  if (!(factor > 0.0)) throw DomainError("feedback factor must be positive");
  auto& e = at(id);
  e.feedback = std::max(e.feedback * factor, floor_ / e.base);
  recompute_sum();
}

void WeightTable::set_feedback(NodeId id, double feedback) {
  if (!(feedback > 0.0)) throw DomainError("feedback must be positive");
  at(id).feedback = feedback;
  recompute_sum();
}

void WeightTable::remove(NodeId id) {
  auto& e = at(id);
  e.present = false;
  --present_;
  recompute_sum();
}

void WeightTable::recompute_sum() {
  double s = 0.0;
  for (const auto& e : entries_) {
    if (e.present) s += std::max(e.base * e.feedback, floor_);
  }
  sum_ = s;
}

namespace {

struct Pool {
  std::vector<NodeId> ids;
  std::vector<double> weights;
};

Pool make_pool(const WeightTable& table, std::span<const NodeId> excluded, bool uniform) {
  std::vector<bool> skip(table.capacity(), false);
  for (NodeId id : excluded) {
    if (id < skip.size()) skip[id] = true;
  }
  Pool pool;
  for (NodeId id : table.selectable_ids()) {
    if (skip[id]) continue;
    pool.ids.push_back(id);
    pool.weights.push_back(uniform ? 1.0 : table.weight(id));
  }
  return pool;
}

std::vector<NodeId> draw_without_replacement(Pool pool, std::size_t count, Rng& rng) {
  if (count > pool.ids.size()) {
    throw InsufficientPool("requested " + std::to_string(count) + " nodes from a pool of " +
                           std::to_string(pool.ids.size()));
  }
  std::vector<NodeId> chosen;
  chosen.reserve(count);
  for (std::size_t draw = 0; draw < count; ++draw) {
    // Re-summing every draw avoids drift from repeated subtraction.
    const double total = std::accumulate(pool.weights.begin(), pool.weights.end(), 0.0);
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = pool.ids.size() - 1;
    for (std::size_t i = 0; i < pool.ids.size(); ++i) {
      acc += pool.weights[i];
      if (target < acc) {
        pick = i;
        break;
      }
    }
    chosen.push_back(pool.ids[pick]);
    // Erase keeps pool order stable, so draws stay reproducible.
    pool.ids.erase(pool.ids.begin() + static_cast<std::ptrdiff_t>(pick));
    pool.weights.erase(pool.weights.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return chosen;
}

}  // namespace

std::vector<NodeId> select_feeders(const WeightTable& table, std::size_t count, Rng& rng,
                                   std::span<const NodeId> excluded) {
  return draw_without_replacement(make_pool(table, excluded, false), count, rng);
}

std::vector<NodeId> select_uniform(const WeightTable& table, std::size_t count, Rng& rng,
                                   std::span<const NodeId> excluded) {
  auto pool = make_pool(table, excluded, true);
  if (count > pool.ids.size()) {
    throw InsufficientPool("requested " + std::to_string(count) + " nodes from a pool of " +
                           std::to_string(pool.ids.size()));
  }
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.ids.size() - i));
    std::swap(pool.ids[i], pool.ids[j]);
  }
  pool.ids.resize(count);
  return pool.ids;
}

void adjust_weight_on_outcome(WeightTable& table, NodeId id, Outcome outcome, double alpha) {
  if (!(alpha >= 0.0) || alpha >= 1.0) throw DomainError("alpha must lie in [0, 1)");
  if (!table.contains(id)) throw LookupError("node " + std::to_string(id) + " not in weight table");
  if (alpha == 0.0) return;
  table.scale_feedback(id, outcome == Outcome::Passed ? 1.0 + alpha : 1.0 - alpha);
}

// --- VRF ---------------------------------------------------------------------

VrfKeyPair vrf_keygen(std::uint64_t master_seed, NodeId id) {
  Bytes buf;
  append_str(buf, "vrf-secret");
  append_u64_be(buf, master_seed);
  append_u64_be(buf, id);
  const auto digest = sha256(buf);
  VrfKeyPair kp;
  kp.secret.assign(digest.begin(), digest.end());
  kp.public_key = vrf_public_key(kp.secret);
  return kp;
}

Bytes vrf_public_key(std::span<const std::uint8_t> secret) {
  Bytes buf;
  append_str(buf, "vrf-pk");
  buf.insert(buf.end(), secret.begin(), secret.end());
  const auto digest = sha256(buf);
  return Bytes(digest.begin(), digest.end());
}

VrfOutput vrf_evaluate(std::span<const std::uint8_t> secret, std::span<const std::uint8_t> seed) {
  if (secret.empty()) throw DomainError("VRF secret key is empty");
  if (seed.empty()) throw DomainError("VRF seed is empty");
  VrfOutput out;
  out.value = hmac_sha256(secret, seed);
  out.proof.assign(out.value.begin(), out.value.end());
  out.proof.insert(out.proof.end(), secret.begin(), secret.end());
  return out;
}

bool vrf_verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> seed,
                const VrfOutput& output) {
  constexpr std::size_t kValueLen = std::tuple_size_v<Digest>;
  if (seed.empty() || output.proof.size() <= kValueLen) return false;
  if (!std::equal(output.value.begin(), output.value.end(), output.proof.begin())) return false;
  const std::span<const std::uint8_t> opening(output.proof.data() + kValueLen, output.proof.size() - kValueLen);
  const Bytes commitment = vrf_public_key(opening);
  if (!std::equal(commitment.begin(), commitment.end(), public_key.begin(), public_key.end())) return false;
  return hmac_sha256(opening, seed) == output.value;
}

std::vector<NodeId> CommitteeRoles::members() const {
  std::vector<NodeId> m{questioner, judge};
  m.insert(m.end(), validators.begin(), validators.end());
  return m;
}

bool CommitteeRoles::contains(NodeId id) const {
  return id == questioner || id == judge || std::find(validators.begin(), validators.end(), id) != validators.end();
}

CommitteeElection rank_by_vrf(std::span<const CommitteeCandidate> candidates, std::size_t count,
                              std::span<const std::uint8_t> seed) {
  if (count > candidates.size()) {
    throw InsufficientPool("committee of " + std::to_string(count) + " from " + std::to_string(candidates.size()) +
                           " candidates");
  }
  struct Entry {
    NodeId id;
    VrfOutput output;
  };
  std::vector<Entry> entries;
  entries.reserve(candidates.size());
  for (const auto& c : candidates) entries.push_back({c.id, vrf_evaluate(c.secret, seed)});
  // Digest bytes compare lexicographically, i.e. as big-endian 256-bit integers.
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.output.value != b.output.value) return a.output.value < b.output.value;
    return a.id < b.id;
  });
  CommitteeElection election;
  for (std::size_t i = 0; i < count; ++i) {
    election.ranked.push_back(entries[i].id);
    election.outputs.push_back(std::move(entries[i].output));
  }
  return election;
}

CommitteeElection select_committee(std::span<const CommitteeCandidate> candidates, std::size_t size,
                                   std::span<const std::uint8_t> round_seed) {
  if (size < 3) throw DomainError("committee needs at least a questioner, a judge and one validator");
  auto election = rank_by_vrf(candidates, size, round_seed);
  election.roles.questioner = election.ranked[0];
  election.roles.judge = election.ranked[1];
  election.roles.validators.assign(election.ranked.begin() + 2, election.ranked.end());
  return election;
}

}  // namespace oraclesim::selection
