#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oraclesim/crypto.hpp"
#include "oraclesim/domain.hpp"
#include "oraclesim/rng.hpp"

namespace oraclesim::selection {

inline constexpr double kWeightFloor = 1e-6;

// Feeder selection weights. Each weight is the product of a reputation-derived
// base and a test-outcome feedback factor; blacklisted nodes are removed for
// good. The cached sum always equals the sum over present entries.
class WeightTable {
 public:
  explicit WeightTable(std::size_t node_count = 0, double floor = kWeightFloor);

  std::size_t capacity() const noexcept { return entries_.size(); }
  bool contains(NodeId id) const noexcept;
  double weight(NodeId id) const;
  double base(NodeId id) const;
  double feedback(NodeId id) const;
  double sum() const noexcept { return sum_; }
  double floor() const noexcept { return floor_; }
  std::size_t selectable_count() const noexcept { return present_; }
  std::vector<NodeId> selectable_ids() const;

  void set_base(NodeId id, double base);
  // Multiplies the feedback factor, keeping the weight at or above the floor.
  void scale_feedback(NodeId id, double factor);
  void set_feedback(NodeId id, double feedback);
  void remove(NodeId id);

 private:
  struct Entry {
    double base = 1.0;
    double feedback = 1.0;
    bool present = true;
  };
  const Entry& at(NodeId id) const;
  Entry& at(NodeId id);
  void recompute_sum();

  std::vector<Entry> entries_;
  double floor_;
  double sum_ = 0.0;
  std::size_t present_ = 0;
};

enum class Outcome : std::uint8_t { Passed, Failed };

// Weighted sampling without replacement: each draw picks a remaining node with
// probability proportional to its weight. `excluded` ids are skipped.
std::vector<NodeId> select_feeders(const WeightTable& table, std::size_t count, Rng& rng,
                                   std::span<const NodeId> excluded = {});

// Uniform sampling without replacement over the present nodes of `table`.
std::vector<NodeId> select_uniform(const WeightTable& table, std::size_t count, Rng& rng,
                                   std::span<const NodeId> excluded = {});

// passed: w *= (1 + alpha); failed: w *= (1 - alpha), floored.
void adjust_weight_on_outcome(WeightTable& table, NodeId id, Outcome outcome, double alpha);

// --- keyed-hash VRF ---------------------------------------------------------
//
// value = HMAC-SHA256(secret, seed); public key = SHA-256("vrf-pk" || secret);
// proof = value || secret. Verification recomputes the commitment and the MAC.
// Publishing the opening is acceptable for a simulator: it keeps the
// determinism and verify contract without an elliptic-curve dependency.

struct VrfKeyPair {
  Bytes secret;
  Bytes public_key;
};

struct VrfOutput {
  Digest value{};
  Bytes proof;
};

VrfKeyPair vrf_keygen(std::uint64_t master_seed, NodeId id);
Bytes vrf_public_key(std::span<const std::uint8_t> secret);
VrfOutput vrf_evaluate(std::span<const std::uint8_t> secret, std::span<const std::uint8_t> seed);
bool vrf_verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> seed,
                const VrfOutput& output);

struct CommitteeCandidate {
  NodeId id = 0;
  std::span<const std::uint8_t> secret;
  std::span<const std::uint8_t> public_key;
};

struct CommitteeRoles {
  NodeId questioner = 0;
  NodeId judge = 0;
  std::vector<NodeId> validators;

  std::vector<NodeId> members() const;
  bool contains(NodeId id) const;
};

struct CommitteeElection {
  CommitteeRoles roles;
  // Winners in ascending VRF order with their outputs.
  std::vector<NodeId> ranked;
  std::vector<VrfOutput> outputs;
};

// Evaluates every candidate's VRF on `seed` and returns the `count` lowest,
// ascending (ties broken by id). Roles are left empty.
CommitteeElection rank_by_vrf(std::span<const CommitteeCandidate> candidates, std::size_t count,
                              std::span<const std::uint8_t> seed);

// The `size` candidates with the lowest VRF values win; lowest becomes the
// questioner, the next the judge, the remainder validators.
CommitteeElection select_committee(std::span<const CommitteeCandidate> candidates, std::size_t size,
                                   std::span<const std::uint8_t> round_seed);

}  // namespace oraclesim::selection
