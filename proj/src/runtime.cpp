#include "vigil/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "vigil/errors.hpp"
#include "vigil/model.hpp"

namespace vigil::runtime {

namespace {
constexpr int64_t kIdleWaitMs = 20;
}

PayloadSchema frame_payload_schema() {
  PayloadSchema schema;
  schema.keys = {"streamId", "sequenceNr"};
  schema.extract_key = [](std::span<const uint8_t> payload,
                          const std::string& key) -> std::optional<std::string> {
    if (key == "streamId") return frame_bytes_stream_id(payload);
    if (key == "sequenceNr") {
      auto seq = frame_bytes_sequence_nr(payload);
      if (!seq) return std::nullopt;
      return std::to_string(*seq);
    }
    return std::nullopt;
  };
  schema.validate = [](std::span<const uint8_t> payload) { return frame_bytes_valid(payload); };
  return schema;
}

std::vector<uint8_t> encode_kv(const std::map<std::string, std::string>& pairs) {
  std::string text;
  for (const auto& [k, v] : pairs) {
    text += k;
    text += '=';
    text += v;
    text += '\n';
  }
  return {text.begin(), text.end()};
}

std::map<std::string, std::string> decode_kv(std::span<const uint8_t> payload) {
  std::map<std::string, std::string> pairs;
  std::string text(payload.begin(), payload.end());
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DecodeError("kv line without '=': " + line);
    pairs[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return pairs;
}

PayloadSchema kv_payload_schema() {
  PayloadSchema schema;
  schema.keys = {"k", "src", "kind"};
  schema.extract_key = [](std::span<const uint8_t> payload,
                          const std::string& key) -> std::optional<std::string> {
    try {
      auto pairs = decode_kv(payload);
      auto it = pairs.find(key);
      if (it == pairs.end()) return std::nullopt;
      return it->second;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  schema.validate = [](std::span<const uint8_t> payload) {
    try {
      decode_kv(payload);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  return schema;
}

uint32_t route(const Grouping& grouping, uint32_t parallelism, std::span<const uint8_t> payload,
               const PayloadSchema& schema, SplitMix64& shuffle_rng) {
  if (parallelism == 0) throw InvariantViolation("route: zero parallelism");
  if (grouping.kind == Grouping::kShuffle)
    return static_cast<uint32_t>(shuffle_rng.below(parallelism));
  auto value = schema.extract_key(payload, grouping.key);
  if (!value)
    throw MissingKey("grouping key '" + grouping.key + "' missing from payload");
  return static_cast<uint32_t>(fnv1a64(*value) % parallelism);
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "sourceEmissions=" << source_emissions << '\n';
  out << "completedRoots=" << completed_roots << '\n';
  out << "replayCount=" << replay_count << '\n';
  out << "failedRoots=" << failed_roots << '\n';
  out << "decodeErrors=" << decode_errors << '\n';
  out << "droppedTuples=" << dropped_tuples << '\n';
  out << "boltErrors=" << bolt_errors << '\n';
  out << "orphanAcks=" << orphan_acks << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", wall_time_s);
  out << "wallTimeS=" << buf << '\n';
  for (const auto& [node, count] : processed) out << "processed." << node << '=' << count << '\n';
  for (const auto& [node, count] : emitted) out << "emitted." << node << '=' << count << '\n';
  return out.str();
}

namespace {

struct Subscriber {
  Grouping grouping;
  std::string to_node;
  uint32_t parallelism = 1;
  size_t first_executor = 0;  // resolved once executors are laid out
};

struct NodeRuntime {
  NodeSpec spec;
  size_t first_executor = 0;
  std::map<std::string, std::vector<Subscriber>> subscribers;  // by stream name
  Topology::SpoutFactory spout_factory;
  Topology::BoltFactory bolt_factory;
};

struct Executor {
  std::string node_id;
  uint32_t instance = 0;
  NodeRuntime* node = nullptr;
  std::unique_ptr<Spout> spout;
  std::unique_ptr<Bolt> bolt;
  SplitMix64 rng{0};
  std::deque<TupleEnvelope> queue;  // bolts only
  bool claimed = false;
  // spout state
  bool exhausted = false;
  int64_t emit_interval = 0;
  int64_t next_emit_ms = 0;
  uint32_t outstanding_roots = 0;  // live roots originated here; bounds the replay buffer
  // bolt tick state
  int64_t tick_interval = 0;
  int64_t next_tick_ms = 0;
};

// Origin of a live tuple tree, kept until the tree completes or fails so a
// timed-out root can be re-emitted byte for byte.
struct PendingRoot {
  size_t spout_executor = 0;
  std::string stream_name;
  std::shared_ptr<const std::vector<uint8_t>> payload;
  uint32_t replays_used = 0;
};

struct AckerMsg {
  bool is_init = false;
  uint64_t root_id = 0;
  uint64_t value = 0;       // init: XOR of initial tuple ids; delta: acked ^ emitted ids
  int64_t deadline_ms = 0;  // init only
  std::string spout_node;   // init only
};

}  // namespace

struct Topology::Impl {
  TopologySpec spec;
  RuntimeOptions opts;
  std::vector<std::string> order;
  std::map<std::string, NodeRuntime> nodes;
  std::vector<Executor> executors;
  std::unique_ptr<Clock> clock;
  VirtualClock* vclock = nullptr;  // non-null iff deterministic

  std::mutex mu;
  std::condition_variable cv;
  bool running = false;
  bool kill = false;
  bool used = false;
  uint64_t queued_total = 0;
  uint64_t processing_count = 0;
  size_t exhausted_spouts = 0;
  size_t total_spouts = 0;
  size_t cursor = 0;
  std::deque<AckerMsg> acker_inbox;
  bool acker_busy = false;
  AckerState acker;
  std::map<uint64_t, PendingRoot> pending;
  SplitMix64 replay_rng{0};
  RunReport report;
  std::exception_ptr fatal;

  Impl(TopologySpec s, RuntimeOptions o) : spec(std::move(s)), opts(std::move(o)) {
    if (!opts.schema.validate || !opts.schema.extract_key)
      opts.schema = frame_payload_schema();
    order = validate_topology(spec, opts.schema.keys);
    for (const auto& node : spec.nodes) nodes[node.node_id].spec = node;
    for (const auto& edge : spec.edges) {
      Subscriber sub;
      sub.grouping = edge.grouping;
      sub.to_node = edge.to_node;
      nodes.at(edge.from_node).subscribers[edge.stream_name].push_back(std::move(sub));
    }
    if (opts.deterministic) {
      auto vc = std::make_unique<VirtualClock>();
      vclock = vc.get();
      clock = std::move(vc);
    } else {
      clock = std::make_unique<WallClock>();
    }
    replay_rng = SplitMix64(opts.seed ^ fnv1a64(std::string("replay")));
  }

  // ---- invocation collector ------------------------------------------------

  enum class Mode { kExecute, kTick, kFlush };

  class Collector final : public BoltOutput {
   public:
    Collector(Impl* impl, Executor* exec, const TupleEnvelope* input, Mode mode)
        : impl_(impl), exec_(exec), input_(input), mode_(mode) {}

    void emit(const std::string& stream, std::vector<uint8_t> payload) override {
      if (mode_ != Mode::kExecute)
        throw InvariantViolation("unanchored emit is only valid inside execute");
      resolve(stream, std::move(payload), input_->root_id, {input_->tuple_id});
    }

    void emit_anchored(const std::string& stream, std::vector<uint8_t> payload,
                       std::span<const TupleEnvelope> anchors) override {
      if (mode_ == Mode::kFlush) throw InvariantViolation("flush may not emit");
      if (anchors.empty()) throw InvariantViolation("emit_anchored needs at least one anchor");
      uint64_t root = anchors.front().root_id;
      std::vector<uint64_t> parent_ids;
      parent_ids.reserve(anchors.size());
      for (const auto& a : anchors) {
        if (a.root_id != root)
          throw MixedRoots("anchors span tuple trees " + std::to_string(root) + " and " +
                           std::to_string(a.root_id));
        parent_ids.push_back(a.tuple_id);
      }
      resolve(stream, std::move(payload), root, std::move(parent_ids));
    }

    void hold() override {
      if (mode_ != Mode::kExecute) throw InvariantViolation("hold is only valid inside execute");
      held_ = true;
    }

    void ack(const TupleEnvelope& envelope) override {
      if (mode_ == Mode::kFlush) return;  // runtime is past acking; drop silently
      deltas_[envelope.root_id] ^= envelope.tuple_id;
    }

    int64_t now_ms() const override { return impl_->clock->now_ms(); }

    bool held() const { return held_; }
    uint64_t emitted() const { return emitted_; }
    std::map<uint64_t, uint64_t>& deltas() { return deltas_; }
    std::vector<std::pair<size_t, TupleEnvelope>>& outgoing() { return outgoing_; }

   private:
    void resolve(const std::string& stream, std::vector<uint8_t> payload, uint64_t root,
                 std::vector<uint64_t> parent_ids) {
      auto shared = std::make_shared<const std::vector<uint8_t>>(std::move(payload));
      auto it = exec_->node->subscribers.find(stream);
      if (it != exec_->node->subscribers.end()) {
        for (const auto& sub : it->second) {
          uint32_t inst =
              route(sub.grouping, sub.parallelism, *shared, impl_->opts.schema, exec_->rng);
          uint64_t id = exec_->rng.nonzero();
          deltas_[root] ^= id;
          TupleEnvelope env;
          env.tuple_id = id;
          env.root_id = root;
          env.stream_name = stream;
          env.payload = shared;
          env.anchors = parent_ids;
          outgoing_.emplace_back(sub.first_executor + inst, std::move(env));
        }
      }
      emitted_++;
    }

    Impl* impl_;
    Executor* exec_;
    const TupleEnvelope* input_;
    Mode mode_;
    bool held_ = false;
    uint64_t emitted_ = 0;
    std::map<uint64_t, uint64_t> deltas_;
    std::vector<std::pair<size_t, TupleEnvelope>> outgoing_;
  };

  // ---- delivery ------------------------------------------------------------

  // Lock held on entry and exit; may release it while draining a full target
  // inline. Inline drains walk forward along topology edges only, and the
  // graph is acyclic, so the chain of waits always terminates.
  void push_envelope(std::unique_lock<std::mutex>& lk, size_t target_idx, TupleEnvelope env) {
    Executor& target = executors[target_idx];
    if (opts.faults.should_drop &&
        opts.faults.should_drop(env, target.node_id, target.instance)) {
      report.dropped_tuples++;
      return;
    }
    while (target.queue.size() >= spec.queue_capacity && !kill) {
      if (!target.claimed) {
        target.claimed = true;
        TupleEnvelope head = std::move(target.queue.front());
        target.queue.pop_front();
        queued_total--;
        processing_count++;
        process_bolt_tuple(lk, target, std::move(head));
        processing_count--;
        target.claimed = false;
        cv.notify_all();
      } else {
        cv.wait(lk);
      }
    }
    if (kill) return;
    target.queue.push_back(std::move(env));
    queued_total++;
    cv.notify_all();
  }

  void flush_invocation(std::unique_lock<std::mutex>& lk, Executor& e, Collector& col) {
    for (const auto& [root, value] : col.deltas()) {
      if (value == 0) continue;
      AckerMsg msg;
      msg.root_id = root;
      msg.value = value;
      acker_inbox.push_back(std::move(msg));
    }
    report.emitted[e.node_id] += col.emitted();
    cv.notify_all();
    for (auto& [idx, env] : col.outgoing()) push_envelope(lk, idx, std::move(env));
  }

  // Lock held on entry and exit; released around the bolt callback.
  void process_bolt_tuple(std::unique_lock<std::mutex>& lk, Executor& e, TupleEnvelope env) {
    lk.unlock();
    bool valid = opts.schema.validate(*env.payload);
    if (!valid) {
      lk.lock();
      report.decode_errors++;
      // Ack the broken tuple so its tree still completes; losing it would
      // just trigger a replay of the same bytes.
      AckerMsg msg;
      msg.root_id = env.root_id;
      msg.value = env.tuple_id;
      acker_inbox.push_back(std::move(msg));
      cv.notify_all();
      return;
    }
    Collector col(this, &e, &env, Mode::kExecute);
    bool failed = false;
    try {
      e.bolt->execute(env, col);
    } catch (const std::exception& ex) {
      failed = true;
      std::cerr << "warning: bolt " << e.node_id << "[" << e.instance
                << "] failed: " << ex.what() << '\n';
    }
    lk.lock();
    if (failed) {
      // No ack and no emissions: the tuple tree times out and the root is
      // replayed, up to the replay budget.
      report.bolt_errors++;
      return;
    }
    if (!col.held()) col.deltas()[env.root_id] ^= env.tuple_id;
    report.processed[e.node_id]++;
    flush_invocation(lk, e, col);
  }

  void process_tick(std::unique_lock<std::mutex>& lk, Executor& e) {
    Collector col(this, &e, nullptr, Mode::kTick);
    lk.unlock();
    bool failed = false;
    try {
      e.bolt->on_tick(col);
    } catch (const std::exception& ex) {
      failed = true;
      std::cerr << "warning: tick on " << e.node_id << "[" << e.instance
                << "] failed: " << ex.what() << '\n';
    }
    lk.lock();
    if (failed)
      report.bolt_errors++;
    else
      flush_invocation(lk, e, col);
    e.next_tick_ms += e.tick_interval;
    int64_t now = clock->now_ms();
    if (!vclock && e.next_tick_ms <= now) e.next_tick_ms = now + e.tick_interval;
  }

  void run_spout_once(std::unique_lock<std::mutex>& lk, Executor& e) {
    lk.unlock();
    std::optional<SpoutEmission> emission;
    std::exception_ptr err;
    try {
      emission = e.spout->next();
    } catch (...) {
      err = std::current_exception();
    }
    lk.lock();
    if (err) {
      // Spouts skip unreadable records themselves; an escape here means the
      // source is unusable, which ends the run.
      if (!fatal) fatal = err;
      kill = true;
      cv.notify_all();
      return;
    }
    if (!emission) {
      e.exhausted = true;
      exhausted_spouts++;
      cv.notify_all();
      return;
    }
    auto shared = std::make_shared<const std::vector<uint8_t>>(std::move(emission->payload));
    report.source_emissions++;
    int64_t now = clock->now_ms();
    if (e.emit_interval > 0) e.next_emit_ms = now + e.emit_interval;
    auto it = e.node->subscribers.find(emission->stream_name);
    if (it == e.node->subscribers.end() || it->second.empty()) {
      // Nobody listens on this stream; the tree is trivially complete.
      report.completed_roots++;
      cv.notify_all();
      return;
    }
    uint64_t root = e.rng.nonzero();
    uint64_t xor_ids = 0;
    std::vector<std::pair<size_t, TupleEnvelope>> outs;
    for (const auto& sub : it->second) {
      uint32_t inst = route(sub.grouping, sub.parallelism, *shared, opts.schema, e.rng);
      uint64_t id = e.rng.nonzero();
      xor_ids ^= id;
      TupleEnvelope env;
      env.tuple_id = id;
      env.root_id = root;
      env.stream_name = emission->stream_name;
      env.payload = shared;
      outs.emplace_back(sub.first_executor + inst, std::move(env));
    }
    PendingRoot entry;
    entry.spout_executor = static_cast<size_t>(&e - executors.data());
    entry.stream_name = emission->stream_name;
    entry.payload = shared;
    pending.emplace(root, std::move(entry));
    e.outstanding_roots++;
    AckerMsg init;
    init.is_init = true;
    init.root_id = root;
    init.value = xor_ids;
    init.deadline_ms = now + spec.message_timeout_ms;
    init.spout_node = e.node_id;
    acker_inbox.push_back(std::move(init));
    cv.notify_all();
    for (auto& [idx, env] : outs) push_envelope(lk, idx, std::move(env));
  }

  // ---- acker ---------------------------------------------------------------

  void replay_root(std::unique_lock<std::mutex>& lk, uint64_t root_id) {
    auto it = pending.find(root_id);
    if (it == pending.end()) return;
    PendingRoot entry = it->second;
    Executor& spout_exec = executors[entry.spout_executor];
    if (entry.replays_used >= opts.replay_budget) {
      report.failed_roots++;
      spout_exec.outstanding_roots--;
      pending.erase(it);
      return;
    }
    entry.replays_used++;
    pending.erase(it);
    uint64_t new_root = replay_rng.nonzero();
    uint64_t xor_ids = 0;
    std::vector<std::pair<size_t, TupleEnvelope>> outs;
    const auto& subs = spout_exec.node->subscribers.at(entry.stream_name);
    for (const auto& sub : subs) {
      uint32_t inst = route(sub.grouping, sub.parallelism, *entry.payload, opts.schema, replay_rng);
      uint64_t id = replay_rng.nonzero();
      xor_ids ^= id;
      TupleEnvelope env;
      env.tuple_id = id;
      env.root_id = new_root;
      env.stream_name = entry.stream_name;
      env.payload = entry.payload;
      outs.emplace_back(sub.first_executor + inst, std::move(env));
    }
    acker.init_root(new_root, xor_ids, clock->now_ms() + spec.message_timeout_ms,
                    spout_exec.node_id);
    pending.emplace(new_root, std::move(entry));
    report.replay_count++;
    cv.notify_all();
    for (auto& [idx, env] : outs) push_envelope(lk, idx, std::move(env));
  }

  bool acker_due(int64_t now) const {
    auto deadline = acker.next_deadline();
    return deadline && *deadline < now;
  }

  // Lock held; caller set acker_busy so only one worker runs this at a time.
  void process_acker(std::unique_lock<std::mutex>& lk) {
    while (!acker_inbox.empty() && !kill) {
      AckerMsg msg = std::move(acker_inbox.front());
      acker_inbox.pop_front();
      if (msg.is_init) {
        acker.init_root(msg.root_id, msg.value, msg.deadline_ms, msg.spout_node);
        continue;
      }
      try {
        if (acker.ack(msg.root_id, msg.value)) {
          auto it = pending.find(msg.root_id);
          if (it != pending.end()) {
            executors[it->second.spout_executor].outstanding_roots--;
            pending.erase(it);
          }
          report.completed_roots++;
          cv.notify_all();
        }
      } catch (const UnknownRoot&) {
        // Ack for a tree that already completed, failed, or was replaced by
        // a replay. Expected under at-least-once delivery.
        report.orphan_acks++;
      }
    }
    auto expired = acker.take_expired(clock->now_ms());
    for (const auto& [root_id, info] : expired) {
      if (kill) break;
      replay_root(lk, root_id);
    }
  }

  // ---- scheduling ----------------------------------------------------------

  bool spout_ready(const Executor& e, int64_t now) const {
    return e.spout && !e.exhausted && !e.claimed && e.outstanding_roots < opts.pending_capacity &&
           now >= e.next_emit_ms;
  }

  bool try_do_work(std::unique_lock<std::mutex>& lk) {
    int64_t now = clock->now_ms();
    if (!acker_busy && (!acker_inbox.empty() || acker_due(now))) {
      acker_busy = true;
      process_acker(lk);
      acker_busy = false;
      cv.notify_all();
      return true;
    }
    size_t n = executors.size();
    for (size_t i = 0; i < n; ++i) {
      Executor& e = executors[(cursor + i) % n];
      if (e.bolt && !e.claimed && e.tick_interval > 0 && now >= e.next_tick_ms) {
        cursor = (cursor + i + 1) % n;
        e.claimed = true;
        processing_count++;
        process_tick(lk, e);
        processing_count--;
        e.claimed = false;
        cv.notify_all();
        return true;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      Executor& e = executors[(cursor + i) % n];
      if (e.bolt && !e.claimed && !e.queue.empty()) {
        cursor = (cursor + i + 1) % n;
        e.claimed = true;
        TupleEnvelope env = std::move(e.queue.front());
        e.queue.pop_front();
        queued_total--;
        cv.notify_all();  // a pusher may be waiting on this slot
        processing_count++;
        process_bolt_tuple(lk, e, std::move(env));
        processing_count--;
        e.claimed = false;
        cv.notify_all();
        return true;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      Executor& e = executors[(cursor + i) % n];
      if (spout_ready(e, now)) {
        cursor = (cursor + i + 1) % n;
        e.claimed = true;
        processing_count++;
        run_spout_once(lk, e);
        processing_count--;
        e.claimed = false;
        cv.notify_all();
        return true;
      }
    }
    return false;
  }

  bool stop_satisfied() const {
    return exhausted_spouts == total_spouts && pending.empty() && queued_total == 0 &&
           acker_inbox.empty() && !acker_busy && processing_count == 0;
  }

  bool quiescent() const {
    return queued_total == 0 && processing_count == 0 && acker_inbox.empty() && !acker_busy;
  }

  void advance_virtual_clock() {
    int64_t now = vclock->now_ms();
    std::optional<int64_t> target;
    auto consider = [&](int64_t t) {
      if (!target || t < *target) target = t;
    };
    // Roots expire strictly after their deadline.
    if (auto deadline = acker.next_deadline()) consider(*deadline + 1);
    for (const Executor& e : executors) {
      if (e.bolt && e.tick_interval > 0) consider(e.next_tick_ms);
      if (e.spout && !e.exhausted && e.outstanding_roots < opts.pending_capacity)
        consider(e.next_emit_ms);
    }
    if (!target)
      throw InvariantViolation("runtime stalled: work pending but nothing scheduled");
    if (*target <= now)
      throw InvariantViolation("runtime stalled: a due event was never claimed");
    vclock->advance_to(*target);
    cv.notify_all();
  }

  void worker_main() {
    std::unique_lock<std::mutex> lk(mu);
    try {
      while (running && !kill) {
        if (try_do_work(lk)) continue;
        if (stop_satisfied()) {
          running = false;
          cv.notify_all();
          break;
        }
        if (vclock) {
          if (quiescent())
            advance_virtual_clock();
          else
            cv.wait(lk);
        } else {
          cv.wait_for(lk, std::chrono::milliseconds(kIdleWaitMs));
        }
      }
    } catch (...) {
      if (!lk.owns_lock()) lk.lock();
      if (!fatal) fatal = std::current_exception();
      kill = true;
    }
    cv.notify_all();
  }

  // ---- lifecycle -----------------------------------------------------------

  RunReport run() {
    {
      std::lock_guard<std::mutex> guard(mu);
      if (used) throw InvariantViolation("a topology can only run once");
      used = true;
    }
    for (const auto& [id, node] : nodes) {
      if (node.spec.kind == NodeKind::kSpout && !node.spout_factory)
        throw InvariantViolation("spout '" + id + "' has no implementation");
      if (node.spec.kind == NodeKind::kBolt && !node.bolt_factory)
        throw InvariantViolation("bolt '" + id + "' has no implementation");
    }
    auto start = std::chrono::steady_clock::now();
    size_t total = 0;
    for (const auto& id : order) total += nodes.at(id).spec.parallelism;
    executors.reserve(total);
    int64_t t0 = clock->now_ms();
    for (const auto& id : order) {
      NodeRuntime& node = nodes.at(id);
      node.first_executor = executors.size();
      for (uint32_t i = 0; i < node.spec.parallelism; ++i) {
        Executor e;
        e.node_id = id;
        e.instance = i;
        e.node = &node;
        e.rng = SplitMix64(opts.seed ^ fnv1a64(id) ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
        if (node.spec.kind == NodeKind::kSpout) {
          e.spout = node.spout_factory(i);
          e.spout->open();
          e.emit_interval = e.spout->emit_interval_ms();
          e.next_emit_ms = t0;
          total_spouts++;
        } else {
          e.bolt = node.bolt_factory(i);
          e.bolt->prepare(i, node.spec.parallelism);
          e.tick_interval = e.bolt->tick_interval_ms();
          e.next_tick_ms = t0 + e.tick_interval;
        }
        executors.push_back(std::move(e));
      }
    }
    for (auto& [id, node] : nodes) {
      for (auto& [stream, subs] : node.subscribers) {
        for (auto& sub : subs) {
          NodeRuntime& target = nodes.at(sub.to_node);
          sub.first_executor = target.first_executor;
          sub.parallelism = target.spec.parallelism;
        }
      }
    }
    running = true;
    uint32_t worker_count = std::max<uint32_t>(1, opts.worker_count);
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (uint32_t w = 0; w < worker_count; ++w)
      workers.emplace_back([this] { worker_main(); });
    for (auto& w : workers) w.join();
    if (fatal) std::rethrow_exception(fatal);
    // Drain bolt state in dependency order so upstream finals land before
    // downstream ones (the chunker packs what the exporter wrote).
    for (const auto& id : order) {
      NodeRuntime& node = nodes.at(id);
      if (node.spec.kind != NodeKind::kBolt) continue;
      for (uint32_t i = 0; i < node.spec.parallelism; ++i) {
        Executor& e = executors[node.first_executor + i];
        Collector col(this, &e, nullptr, Mode::kFlush);
        e.bolt->flush(col);
      }
    }
    for (const Executor& e : executors)
      if (e.spout) report.decode_errors += e.spout->decode_errors();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }

  void request_stop() {
    std::lock_guard<std::mutex> guard(mu);
    kill = true;
    cv.notify_all();
  }
};

Topology::Topology(TopologySpec spec, RuntimeOptions opts)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(opts))) {}
Topology::~Topology() = default;
Topology::Topology(Topology&&) noexcept = default;

void Topology::set_spout(const std::string& node_id, SpoutFactory factory) {
  auto it = impl_->nodes.find(node_id);
  if (it == impl_->nodes.end()) throw UnknownNode("no node named '" + node_id + "'");
  if (it->second.spec.kind != NodeKind::kSpout)
    throw InvariantViolation("'" + node_id + "' is a bolt, not a spout");
  it->second.spout_factory = std::move(factory);
}

void Topology::set_bolt(const std::string& node_id, BoltFactory factory) {
  auto it = impl_->nodes.find(node_id);
  if (it == impl_->nodes.end()) throw UnknownNode("no node named '" + node_id + "'");
  if (it->second.spec.kind != NodeKind::kBolt)
    throw InvariantViolation("'" + node_id + "' is a spout, not a bolt");
  it->second.bolt_factory = std::move(factory);
}

RunReport Topology::run() { return impl_->run(); }
void Topology::request_stop() { impl_->request_stop(); }
Clock& Topology::clock() { return *impl_->clock; }
const std::vector<std::string>& Topology::topo_order() const { return impl_->order; }
const TopologySpec& Topology::spec() const { return impl_->spec; }

Topology build_topology(TopologySpec spec, RuntimeOptions opts) {
  return Topology(std::move(spec), std::move(opts));
}

}  // namespace vigil::runtime
