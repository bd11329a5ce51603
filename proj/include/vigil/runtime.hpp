#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vigil/acker.hpp"
#include "vigil/clock.hpp"
#include "vigil/rng.hpp"
#include "vigil/topology.hpp"

namespace vigil::runtime {

// How the runtime looks inside an opaque payload: which grouping keys exist,
// how to read one, and how to vet the bytes before any bolt sees them.
struct PayloadSchema {
  std::set<std::string> keys;
  std::function<std::optional<std::string>(std::span<const uint8_t>, const std::string&)>
      extract_key;
  std::function<bool(std::span<const uint8_t>)> validate;
};

// Frames on the wire: keys streamId and sequenceNr, validated structurally.
PayloadSchema frame_payload_schema();

// Plain-text "key=value" lines, one per key. Keeps runtime tests independent
// of the vision stack.
PayloadSchema kv_payload_schema();
std::vector<uint8_t> encode_kv(const std::map<std::string, std::string>& pairs);
std::map<std::string, std::string> decode_kv(std::span<const uint8_t> payload);

// Target instance for one envelope crossing one edge. Shuffle draws from the
// caller's RNG; fields hashes the key value so equal keys always land on the
// same instance. Throws MissingKey.
uint32_t route(const Grouping& grouping, uint32_t parallelism, std::span<const uint8_t> payload,
               const PayloadSchema& schema, SplitMix64& shuffle_rng);

struct SpoutEmission {
  std::string stream_name;
  std::vector<uint8_t> payload;
};

class Spout {
 public:
  virtual ~Spout() = default;
  virtual void open() {}
  // Next record, or nullopt once the source is permanently exhausted.
  virtual std::optional<SpoutEmission> next() = 0;
  // Minimum gap between emissions; 0 means as fast as backpressure allows.
  virtual int64_t emit_interval_ms() const { return 0; }
  // Source records skipped as unreadable, for the run report.
  virtual uint64_t decode_errors() const { return 0; }
};

// Emission surface handed to a bolt for one invocation. Emissions made
// during execute() are anchored to the input tuple unless explicitly
// anchored elsewhere; the input is acked automatically when execute returns
// unless hold() was called.
class BoltOutput {
 public:
  virtual ~BoltOutput() = default;
  virtual void emit(const std::string& stream, std::vector<uint8_t> payload) = 0;
  virtual void emit_anchored(const std::string& stream, std::vector<uint8_t> payload,
                             std::span<const TupleEnvelope> anchors) = 0;
  // Keep the current input alive past this invocation; the bolt must ack it
  // later (joins hold one side while waiting for the other).
  virtual void hold() = 0;
  virtual void ack(const TupleEnvelope& envelope) = 0;
  virtual int64_t now_ms() const = 0;
};

class Bolt {
 public:
  virtual ~Bolt() = default;
  virtual void prepare(uint32_t /*instance_index*/, uint32_t /*parallelism*/) {}
  virtual void execute(const TupleEnvelope& input, BoltOutput& out) = 0;
  // Called when tick_interval_ms() > 0, roughly every interval.
  virtual void on_tick(BoltOutput& /*out*/) {}
  virtual int64_t tick_interval_ms() const { return 0; }
  // Called once per instance at shutdown, in topological node order.
  // Emissions are not allowed here; side effects (final chunk) are.
  virtual void flush(BoltOutput& /*out*/) {}
};

struct RunReport {
  uint64_t source_emissions = 0;
  uint64_t completed_roots = 0;
  uint64_t replay_count = 0;
  uint64_t failed_roots = 0;
  uint64_t decode_errors = 0;
  uint64_t dropped_tuples = 0;
  uint64_t bolt_errors = 0;
  uint64_t orphan_acks = 0;
  double wall_time_s = 0.0;
  std::map<std::string, uint64_t> processed;
  std::map<std::string, uint64_t> emitted;

  std::string to_text() const;  // flat key=value block
};

struct FaultInjection {
  // Consulted for every envelope delivery; return true to drop it silently.
  // The dropped tuple stays unacked, so its tree times out and replays.
  std::function<bool(const TupleEnvelope& envelope, const std::string& to_node,
                     uint32_t to_instance)>
      should_drop;
};

struct RuntimeOptions {
  uint32_t worker_count = 4;
  // Virtual clock plus fixed seed: two runs over the same input produce the
  // same results bit for bit, regardless of worker_count.
  bool deterministic = false;
  uint64_t seed = 0x76696C5F5345454CULL;
  uint32_t pending_capacity = 64;  // spout replay buffer (frames held per spout)
  uint32_t replay_budget = 3;      // replays per root before it is recorded failed
  PayloadSchema schema;            // defaults to frame_payload_schema()
  FaultInjection faults;
};

class Topology {
 public:
  Topology(TopologySpec spec, RuntimeOptions opts);
  ~Topology();
  Topology(Topology&&) noexcept;
  Topology& operator=(Topology&&) = delete;

  using SpoutFactory = std::function<std::unique_ptr<Spout>(uint32_t instance)>;
  using BoltFactory = std::function<std::unique_ptr<Bolt>(uint32_t instance)>;
  void set_spout(const std::string& node_id, SpoutFactory factory);
  void set_bolt(const std::string& node_id, BoltFactory factory);

  // Runs to completion (sources exhausted, every tuple tree resolved) or
  // until request_stop(). Single use.
  RunReport run();
  void request_stop();

  Clock& clock();
  const std::vector<std::string>& topo_order() const;
  const TopologySpec& spec() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Validates the spec against the schema's keys and returns the executable
// topology. Throws CycleDetected, UnknownNode, BadGroupingKey.
Topology build_topology(TopologySpec spec, RuntimeOptions opts = {});

}  // namespace vigil::runtime
