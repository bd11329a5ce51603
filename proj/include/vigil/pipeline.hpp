#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "vigil/annotate.hpp"
#include "vigil/bgsub.hpp"
#include "vigil/haar.hpp"
#include "vigil/hog.hpp"
#include "vigil/ingest.hpp"
#include "vigil/runtime.hpp"
#include "vigil/sink.hpp"

namespace vigil::pipeline {

using runtime::TopologySpec;
using runtime::TupleEnvelope;

// Node ids of the surveillance topology.
inline constexpr const char* kFetcher = "fetcher";
inline constexpr const char* kBgSub = "bgsub";
inline constexpr const char* kFaceDetect = "faceDetect";
inline constexpr const char* kPersonDetect = "personDetect";
inline constexpr const char* kLabeller = "labeller";
inline constexpr const char* kExport = "export";
inline constexpr const char* kVideoExport = "videoExport";

// Stream names.
inline constexpr const char* kRawStream = "raw";
inline constexpr const char* kEligibleStream = "eligible";
inline constexpr const char* kDetectStream = "detect";
inline constexpr const char* kFacesStream = "faces";
inline constexpr const char* kPersonsStream = "persons";
inline constexpr const char* kLabelledStream = "labelled";

struct BgSubSettings {
  double alpha = 0.05;
  bgsub::BlobGateConfig gate;
};

// Maintains one background model per stream id, updates it on every frame,
// and forwards only frames whose largest foreground blob clears the area
// gate, tagged with a "foreground" feature. Must sit behind a
// fields(streamId) edge so each stream's model lives in one instance.
class BgSubBolt final : public runtime::Bolt {
 public:
  explicit BgSubBolt(BgSubSettings settings) : settings_(settings) {}
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;

 private:
  BgSubSettings settings_;
  std::map<std::string, bgsub::BackgroundModel> models_;
};

// Runs the cascade over each frame and always forwards it, adding a "face"
// feature whose descriptor list may be empty; the labeller needs both
// detector verdicts per frame, including negative ones.
class FaceDetectBolt final : public runtime::Bolt {
 public:
  FaceDetectBolt(std::shared_ptr<const detect::HaarCascadeModel> model,
                 detect::ScanParams scan)
      : model_(std::move(model)), scan_(scan) {}
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;

 private:
  std::shared_ptr<const detect::HaarCascadeModel> model_;
  detect::ScanParams scan_;
};

class PersonDetectBolt final : public runtime::Bolt {
 public:
  PersonDetectBolt(std::shared_ptr<const detect::HogModel> model, detect::ScanParams scan)
      : model_(std::move(model)), scan_(scan) {}
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;

 private:
  std::shared_ptr<const detect::HogModel> model_;
  detect::ScanParams scan_;
};

// Joins the two detection streams on (streamId, sequenceNr), merges their
// features, draws the boxes, and emits the labelled frame. A side that
// waits longer than the join timeout goes out one-sided.
class LabellerBolt final : public runtime::Bolt {
 public:
  explicit LabellerBolt(int64_t join_timeout_ms);
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;
  void on_tick(runtime::BoltOutput& out) override;
  int64_t tick_interval_ms() const override { return tick_interval_ms_; }
  void flush(runtime::BoltOutput& out) override;

  size_t open_joins() const { return slots_.size(); }

 private:
  void emit_labelled(runtime::BoltOutput& out, const Frame& merged,
                     std::span<const TupleEnvelope> anchors);

  struct Slot {
    std::optional<TupleEnvelope> face;
    std::optional<TupleEnvelope> person;
    int64_t deadline_ms = 0;
  };

  int64_t join_timeout_ms_;
  int64_t tick_interval_ms_;
  annotate::LabelStyle style_;
  std::map<std::pair<std::string, uint64_t>, Slot> slots_;
};

// Writes eligible frames and labelled detection frames to the category
// folders through one shared deduping writer.
class ExportBolt final : public runtime::Bolt {
 public:
  explicit ExportBolt(std::shared_ptr<sink::FrameWriter> writer) : writer_(std::move(writer)) {}
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;

 private:
  std::shared_ptr<sink::FrameWriter> writer_;
};

// Edge-less bolt driving the folder-polling chunker: polls on ticks, packs
// the final short chunk at flush.
class ChunkerBolt final : public runtime::Bolt {
 public:
  ChunkerBolt(std::shared_ptr<sink::Chunker> chunker, int64_t poll_interval_ms)
      : chunker_(std::move(chunker)), poll_interval_ms_(poll_interval_ms) {}
  void execute(const TupleEnvelope& input, runtime::BoltOutput& out) override;
  void on_tick(runtime::BoltOutput& out) override;
  int64_t tick_interval_ms() const override { return poll_interval_ms_; }
  void flush(runtime::BoltOutput& out) override;

 private:
  std::shared_ptr<sink::Chunker> chunker_;
  int64_t poll_interval_ms_;
};

struct PipelineSettings {
  FetcherConfig source;
  BgSubSettings bgsub;
  std::shared_ptr<const detect::HaarCascadeModel> face_model;
  std::shared_ptr<const detect::HogModel> person_model;
  detect::ScanParams scan;
  sink::SinkConfig sink;
  sink::ChunkerConfig chunker;
  int64_t join_timeout_ms = 1000;
  // Per-node parallelism; fetcher and videoExport are fixed at 1.
  std::map<std::string, uint32_t> parallelism;
  int64_t message_timeout_ms = 5000;
  uint32_t queue_capacity = 256;
  runtime::RuntimeOptions runtime;
};

// The topology shape: fetcher feeds bgsub, bgsub fans out to the export
// path and both detectors, the detectors meet at the labeller, and the
// labeller feeds export. The video chunker takes no stream; it polls the
// EligibleFrames folder on its own clock.
TopologySpec surveillance_topology_spec(const PipelineSettings& settings);

// Spec plus wired node implementations, ready to run.
runtime::Topology build_surveillance_topology(const PipelineSettings& settings);

}  // namespace vigil::pipeline
