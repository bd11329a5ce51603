#include "vigil/topology.hpp"

#include <map>

#include "vigil/errors.hpp"

namespace vigil::runtime {

std::vector<std::string> validate_topology(const TopologySpec& spec,
                                           const std::set<std::string>& payload_keys) {
  if (spec.message_timeout_ms < 1) throw InvariantViolation("messageTimeoutMs must be positive");
  if (spec.queue_capacity < 1) throw InvariantViolation("queueCapacity must be positive");

  std::map<std::string, const NodeSpec*> by_id;
  for (const NodeSpec& node : spec.nodes) {
    if (node.node_id.empty()) throw InvariantViolation("node id must be nonempty");
    if (node.parallelism < 1) {
      throw InvariantViolation("parallelism must be at least 1 on node " + node.node_id);
    }
    if (!by_id.emplace(node.node_id, &node).second) {
      throw InvariantViolation("duplicate node id " + node.node_id);
    }
  }

  std::map<std::string, std::vector<std::string>> successors;
  std::map<std::string, uint32_t> indegree;
  for (const NodeSpec& node : spec.nodes) indegree[node.node_id] = 0;

  for (const EdgeSpec& edge : spec.edges) {
    auto from = by_id.find(edge.from_node);
    auto to = by_id.find(edge.to_node);
    if (from == by_id.end()) throw UnknownNode("edge references undeclared node " + edge.from_node);
    if (to == by_id.end()) throw UnknownNode("edge references undeclared node " + edge.to_node);
    if (to->second->kind == NodeKind::kSpout) {
      throw InvariantViolation("spout " + edge.to_node + " cannot receive a stream");
    }
    if (edge.stream_name.empty()) throw InvariantViolation("stream name must be nonempty");
    if (edge.grouping.kind == Grouping::kFields && !payload_keys.contains(edge.grouping.key)) {
      throw BadGroupingKey("fields grouping names unknown payload key '" + edge.grouping.key +
                           "'");
    }
    successors[edge.from_node].push_back(edge.to_node);
    ++indegree[edge.to_node];
  }

  // Kahn's algorithm; ties resolved by declaration order so the returned
  // order (used for flushing) is stable.
  std::vector<std::string> order;
  std::vector<std::string> ready;
  for (const NodeSpec& node : spec.nodes) {
    if (indegree[node.node_id] == 0) ready.push_back(node.node_id);
  }
  while (!ready.empty()) {
    std::string id = ready.front();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const std::string& next : successors[id]) {
      if (--indegree[next] == 0) ready.push_back(next);
    }
  }
  if (order.size() != spec.nodes.size()) {
    throw CycleDetected("topology graph contains a cycle");
  }
  return order;
}

}  // namespace vigil::runtime
