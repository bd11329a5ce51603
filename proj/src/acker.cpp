#include "vigil/acker.hpp"

#include <algorithm>

namespace vigil::runtime {

void AckerState::init_root(uint64_t root_id, uint64_t first_tuple_id, int64_t deadline_ms,
                           std::string spout_node) {
  if (first_tuple_id == 0) throw InvariantViolation("tuple id 0 is reserved");
  auto [it, inserted] = roots_.emplace(
      root_id, Root{first_tuple_id, deadline_ms, std::move(spout_node)});
  if (!inserted) throw InvariantViolation("root id already registered");
}

bool AckerState::ack(uint64_t root_id, uint64_t value) {
  auto it = roots_.find(root_id);
  if (it == roots_.end()) throw UnknownRoot("root not pending (completed, replayed, or never seen)");
  it->second.xor_value ^= value;
  if (it->second.xor_value == 0) {
    roots_.erase(it);
    return true;
  }
  return false;
}

uint64_t AckerState::xor_value(uint64_t root_id) const {
  auto it = roots_.find(root_id);
  if (it == roots_.end()) throw UnknownRoot("root not pending");
  return it->second.xor_value;
}

std::vector<std::pair<uint64_t, AckerState::Root>> AckerState::take_expired(int64_t now_ms) {
  std::vector<std::pair<uint64_t, Root>> expired;
  for (auto it = roots_.begin(); it != roots_.end();) {
    if (now_ms > it->second.deadline_ms) {
      expired.emplace_back(it->first, it->second);
      it = roots_.erase(it);
    } else {
      ++it;
    }
  }
  std::sort(expired.begin(), expired.end(), [](const auto& a, const auto& b) {
    return a.second.deadline_ms < b.second.deadline_ms;
  });
  return expired;
}

std::optional<int64_t> AckerState::next_deadline() const {
  std::optional<int64_t> earliest;
  for (const auto& [root, entry] : roots_) {
    if (!earliest || entry.deadline_ms < *earliest) earliest = entry.deadline_ms;
  }
  return earliest;
}

TupleEnvelope emit_spout(SplitMix64& rng, AckerState& acker, const std::string& stream_name,
                         std::shared_ptr<const std::vector<uint8_t>> payload, int64_t deadline_ms,
                         const std::string& spout_node) {
  TupleEnvelope env;
  env.tuple_id = rng.nonzero();
  env.root_id = rng.nonzero();
  env.stream_name = stream_name;
  env.payload = std::move(payload);
  acker.init_root(env.root_id, env.tuple_id, deadline_ms, spout_node);
  return env;
}

TupleEnvelope emit_anchored(SplitMix64& rng, AckerState& acker, const std::string& stream_name,
                            std::shared_ptr<const std::vector<uint8_t>> payload,
                            std::span<const TupleEnvelope> anchors) {
  if (anchors.empty()) throw InvariantViolation("anchored emission needs at least one anchor");
  uint64_t root = anchors.front().root_id;
  for (const TupleEnvelope& a : anchors) {
    if (a.root_id != root) throw MixedRoots("anchors belong to different tuple trees");
  }

  TupleEnvelope env;
  // A fresh id equal to the current XOR would zero it and fake completion;
  // redraw that (astronomically unlikely) id.
  uint64_t id = rng.nonzero();
  while (acker.xor_value(root) == id) id = rng.nonzero();
  env.tuple_id = id;
  env.root_id = root;
  env.stream_name = stream_name;
  env.payload = std::move(payload);
  for (const TupleEnvelope& a : anchors) env.anchors.push_back(a.tuple_id);
  acker.ack(root, env.tuple_id);
  return env;
}

}  // namespace vigil::runtime
