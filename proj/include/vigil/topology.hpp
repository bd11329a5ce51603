#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace vigil::runtime {

enum class NodeKind { kSpout, kBolt };

struct NodeSpec {
  std::string node_id;
  NodeKind kind = NodeKind::kBolt;
  uint32_t parallelism = 1;
};

struct Grouping {
  enum Kind { kShuffle, kFields };
  Kind kind = kShuffle;
  std::string key;  // set for kFields

  static Grouping shuffle() { return {kShuffle, {}}; }
  static Grouping fields(std::string key) { return {kFields, std::move(key)}; }
};

struct EdgeSpec {
  std::string from_node;
  std::string stream_name;
  std::string to_node;
  Grouping grouping;
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  int64_t message_timeout_ms = 5000;
  uint32_t queue_capacity = 256;
};

// Checks the spec against the structural invariants (acyclic, known nodes,
// positive parallelism, grouping keys drawn from the payload schema) and
// returns the node ids in topological order. Throws CycleDetected,
// UnknownNode, BadGroupingKey, or InvariantViolation.
std::vector<std::string> validate_topology(const TopologySpec& spec,
                                           const std::set<std::string>& payload_keys);

}  // namespace vigil::runtime
