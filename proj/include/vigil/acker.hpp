#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/rng.hpp"

namespace vigil::runtime {

// One tuple in flight. The payload is shared, never mutated; copies of an
// envelope for multiple subscribers differ only in tuple id.
struct TupleEnvelope {
  uint64_t tuple_id = 0;  // nonzero
  uint64_t root_id = 0;   // identifies the spout emission's tuple tree
  std::string stream_name;
  std::shared_ptr<const std::vector<uint8_t>> payload;
  std::vector<uint64_t> anchors;  // parent tuple ids; empty iff spout-emitted
};

// XOR bookkeeping per tuple tree: the running XOR of every emitted but
// not-yet-acked tuple id. Zero means the tree is fully processed. The state
// is plain data; the runtime serializes access through its acker worker.
class AckerState {
 public:
  struct Root {
    uint64_t xor_value = 0;
    int64_t deadline_ms = 0;
    std::string spout_node;
  };

  void init_root(uint64_t root_id, uint64_t first_tuple_id, int64_t deadline_ms,
                 std::string spout_node);

  // XORs the id of a processed tuple (or a whole emission delta) into the
  // root. Returns true when the tree just completed; completed roots are
  // removed. Throws UnknownRoot for roots never seen or already completed.
  bool ack(uint64_t root_id, uint64_t value);

  bool has_root(uint64_t root_id) const { return roots_.contains(root_id); }
  uint64_t xor_value(uint64_t root_id) const;
  size_t pending_count() const { return roots_.size(); }

  // Roots whose deadline has passed, oldest deadline first. Entries are
  // removed; the caller owns the replay decision.
  std::vector<std::pair<uint64_t, Root>> take_expired(int64_t now_ms);

  // Earliest deadline over all pending roots, or nullopt.
  std::optional<int64_t> next_deadline() const;

  void remove(uint64_t root_id) { roots_.erase(root_id); }

 private:
  std::map<uint64_t, Root> roots_;
};

// Spout-side emission: fresh nonzero tuple id under a fresh root, registered
// with the acker.
TupleEnvelope emit_spout(SplitMix64& rng, AckerState& acker, const std::string& stream_name,
                         std::shared_ptr<const std::vector<uint8_t>> payload, int64_t deadline_ms,
                         const std::string& spout_node);

// Bolt-side emission anchored to one or more parents. All anchors must share
// a root (MixedRoots otherwise); the new tuple id is XORed into that root.
TupleEnvelope emit_anchored(SplitMix64& rng, AckerState& acker, const std::string& stream_name,
                            std::shared_ptr<const std::vector<uint8_t>> payload,
                            std::span<const TupleEnvelope> anchors);

}  // namespace vigil::runtime
