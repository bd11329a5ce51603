#include <doctest.h>

#include <algorithm>

#include "vigil/errors.hpp"
#include "vigil/topology.hpp"

using namespace vigil;
using namespace vigil::runtime;

namespace {

NodeSpec spout(const std::string& id, uint32_t par = 1) {
  return NodeSpec{id, NodeKind::kSpout, par};
}
NodeSpec bolt(const std::string& id, uint32_t par = 1) { return NodeSpec{id, NodeKind::kBolt, par}; }

// The classic surveillance wiring: one camera spout fanning out to the
// detector pair, rejoined by the labeller, drained by the exporters.
TopologySpec example_topology() {
  TopologySpec spec;
  spec.nodes = {spout("fetcher"),      bolt("bgsub", 2),    bolt("faceDetect", 4),
                bolt("personDetect", 4), bolt("labeller", 2), bolt("export"),
                bolt("videoExport")};
  spec.edges = {
      {"fetcher", "raw", "bgsub", Grouping::fields("streamId")},
      {"bgsub", "detect", "faceDetect", Grouping::shuffle()},
      {"bgsub", "detect", "personDetect", Grouping::shuffle()},
      {"faceDetect", "faces", "labeller", Grouping::fields("streamId")},
      {"personDetect", "persons", "labeller", Grouping::fields("streamId")},
      {"labeller", "labelled", "export", Grouping::fields("streamId")},
  };
  return spec;
}

size_t index_of(const std::vector<std::string>& order, const std::string& id) {
  auto it = std::find(order.begin(), order.end(), id);
  REQUIRE(it != order.end());
  return static_cast<size_t>(it - order.begin());
}

const std::set<std::string> kKeys{"streamId", "sequenceNr"};

}  // namespace

TEST_CASE("the example topology validates and orders sources first") {
  TopologySpec spec = example_topology();
  auto order = validate_topology(spec, kKeys);
  REQUIRE(order.size() == 7);

  // every edge points forward in the returned order
  for (const EdgeSpec& e : spec.edges) {
    CHECK(index_of(order, e.from_node) < index_of(order, e.to_node));
  }
  CHECK(order.front() == "fetcher");

  // stable across repeated validation
  CHECK(validate_topology(spec, kKeys) == order);
}

TEST_CASE("nodes without edges still appear in the order") {
  TopologySpec spec;
  spec.nodes = {spout("a"), bolt("island")};
  auto order = validate_topology(spec, kKeys);
  REQUIRE(order.size() == 2);
  CHECK(index_of(order, "island") < 2);
}

TEST_CASE("cycles are rejected") {
  TopologySpec spec;
  spec.nodes = {spout("src"), bolt("a"), bolt("b"), bolt("c")};
  spec.edges = {
      {"src", "s", "a", Grouping::shuffle()},
      {"a", "s", "b", Grouping::shuffle()},
      {"b", "s", "c", Grouping::shuffle()},
      {"c", "s", "a", Grouping::shuffle()},
  };
  CHECK_THROWS_AS(validate_topology(spec, kKeys), CycleDetected);

  TopologySpec self_loop;
  self_loop.nodes = {bolt("a")};
  self_loop.edges = {{"a", "s", "a", Grouping::shuffle()}};
  CHECK_THROWS_AS(validate_topology(self_loop, kKeys), CycleDetected);
}

TEST_CASE("edges must reference declared nodes") {
  TopologySpec spec;
  spec.nodes = {spout("src"), bolt("sink")};
  spec.edges = {{"src", "s", "ghost", Grouping::shuffle()}};
  CHECK_THROWS_AS(validate_topology(spec, kKeys), UnknownNode);
  spec.edges = {{"ghost", "s", "sink", Grouping::shuffle()}};
  CHECK_THROWS_AS(validate_topology(spec, kKeys), UnknownNode);
}

TEST_CASE("spouts cannot receive streams") {
  TopologySpec spec;
  spec.nodes = {spout("a"), spout("b")};
  spec.edges = {{"a", "s", "b", Grouping::shuffle()}};
  CHECK_THROWS_AS(validate_topology(spec, kKeys), InvariantViolation);
}

TEST_CASE("fields grouping needs a key from the payload schema") {
  TopologySpec spec;
  spec.nodes = {spout("src"), bolt("sink")};
  spec.edges = {{"src", "s", "sink", Grouping::fields("nonesuch")}};
  CHECK_THROWS_AS(validate_topology(spec, kKeys), BadGroupingKey);
  spec.edges = {{"src", "s", "sink", Grouping::fields("sequenceNr")}};
  CHECK(validate_topology(spec, kKeys).size() == 2);
}

TEST_CASE("node level invariants") {
  TopologySpec zero_par;
  zero_par.nodes = {spout("src", 0)};
  CHECK_THROWS_AS(validate_topology(zero_par, kKeys), InvariantViolation);

  TopologySpec dup;
  dup.nodes = {bolt("x"), bolt("x")};
  CHECK_THROWS_AS(validate_topology(dup, kKeys), InvariantViolation);

  TopologySpec anon;
  anon.nodes = {bolt("")};
  CHECK_THROWS_AS(validate_topology(anon, kKeys), InvariantViolation);
}

TEST_CASE("edge and runtime parameter invariants") {
  TopologySpec spec;
  spec.nodes = {spout("src"), bolt("sink")};
  spec.edges = {{"src", "", "sink", Grouping::shuffle()}};
  CHECK_THROWS_AS(validate_topology(spec, kKeys), InvariantViolation);

  TopologySpec bad_timeout;
  bad_timeout.nodes = {bolt("x")};
  bad_timeout.message_timeout_ms = 0;
  CHECK_THROWS_AS(validate_topology(bad_timeout, kKeys), InvariantViolation);

  TopologySpec bad_queue;
  bad_queue.nodes = {bolt("x")};
  bad_queue.queue_capacity = 0;
  CHECK_THROWS_AS(validate_topology(bad_queue, kKeys), InvariantViolation);
}
