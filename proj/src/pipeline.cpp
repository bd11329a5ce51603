#include "vigil/pipeline.hpp"

#include <algorithm>
#include <utility>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/model.hpp"

namespace vigil::pipeline {

using runtime::Grouping;
using runtime::NodeKind;

namespace {

bool has_detections(const Frame& frame) {
  for (const Feature& feature : frame.features) {
    if ((feature.name == "face" || feature.name == "person") && !feature.descriptors.empty())
      return true;
  }
  return false;
}

bool feature_nonempty(const Frame& frame, const std::string& name) {
  for (const Feature& feature : frame.features)
    if (feature.name == name) return !feature.descriptors.empty();
  return false;
}

}  // namespace

void BgSubBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& out) {
  Frame frame = decode_frame(*input.payload);
  Frame gray = bgsub::to_grayscale(frame);
  auto [it, created] = models_.try_emplace(frame.stream_id, settings_.alpha);
  bgsub::BackgroundModel& model = it->second;
  bgsub::accumulate_weighted(model, gray);
  bgsub::BinaryMask mask = bgsub::abs_diff_threshold(model, gray, settings_.gate);
  std::vector<bgsub::Blob> blobs = bgsub::connected_components(mask);
  uint64_t frame_area = static_cast<uint64_t>(frame.width) * frame.height;
  const bgsub::Blob* blob = bgsub::gating_blob(blobs, frame_area, settings_.gate);
  if (!blob) return;  // background-only frame: ack and drop
  Frame tagged = frame;
  double confidence =
      std::min(1.0, static_cast<double>(blob->area) / static_cast<double>(frame_area));
  tagged.features.push_back(Feature{"foreground", {Descriptor{blob->bbox, "foreground", confidence}}});
  std::vector<uint8_t> bytes = encode_frame(tagged);
  out.emit(kEligibleStream, bytes);
  out.emit(kDetectStream, std::move(bytes));
}

void FaceDetectBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& out) {
  Frame frame = decode_frame(*input.payload);
  std::vector<Descriptor> found = detect::detect_multiscale_cascade(frame, *model_, scan_);
  frame.features.push_back(Feature{"face", std::move(found)});
  out.emit(kFacesStream, encode_frame(frame));
}

void PersonDetectBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& out) {
  Frame frame = decode_frame(*input.payload);
  std::vector<Descriptor> found = detect::detect_multiscale_hog(frame, *model_, scan_);
  frame.features.push_back(Feature{"person", std::move(found)});
  out.emit(kPersonsStream, encode_frame(frame));
}

LabellerBolt::LabellerBolt(int64_t join_timeout_ms)
    : join_timeout_ms_(join_timeout_ms),
      tick_interval_ms_(std::max<int64_t>(1, join_timeout_ms / 4)),
      style_(annotate::default_label_style()) {
  if (join_timeout_ms < 1) throw ConfigError("joinTimeoutMs must be positive");
}

void LabellerBolt::emit_labelled(runtime::BoltOutput& out, const Frame& merged,
                                 std::span<const TupleEnvelope> anchors) {
  if (!has_detections(merged)) return;  // nothing to store for this frame
  Frame labelled = annotate::label_frame(merged, style_);
  out.emit_anchored(kLabelledStream, encode_frame(labelled), anchors);
}

void LabellerBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& out) {
  Frame frame = decode_frame(*input.payload);
  bool is_face_side = input.stream_name == kFacesStream;
  auto key = std::make_pair(frame.stream_id, frame.sequence_nr);
  auto [it, created] = slots_.emplace(key, Slot{});
  Slot& slot = it->second;
  if (created) slot.deadline_ms = out.now_ms() + join_timeout_ms_;
  std::optional<TupleEnvelope>& mine = is_face_side ? slot.face : slot.person;
  std::optional<TupleEnvelope>& other = is_face_side ? slot.person : slot.face;
  if (mine) {
    // Replayed duplicate of a side already waiting: retire the stale copy
    // and keep the fresh one, whose tuple tree is the live one.
    out.ack(*mine);
    mine = input;
    out.hold();
    return;
  }
  if (!other) {
    mine = input;
    out.hold();
    return;
  }
  Frame other_frame = decode_frame(*other->payload);
  const Frame& face_frame = is_face_side ? frame : other_frame;
  const Frame& person_frame = is_face_side ? other_frame : frame;
  Frame merged = annotate::merge_features(face_frame, person_frame);
  if (other->root_id == input.root_id) {
    TupleEnvelope anchors[2] = {*other, input};
    emit_labelled(out, merged, anchors);
  } else {
    // The sides come from different replays of the source frame. Anchor the
    // newer tree only; the older one is already dead at the acker.
    TupleEnvelope anchors[1] = {input};
    emit_labelled(out, merged, anchors);
  }
  out.ack(*other);
  slots_.erase(it);
}

void LabellerBolt::on_tick(runtime::BoltOutput& out) {
  int64_t now = out.now_ms();
  for (auto it = slots_.begin(); it != slots_.end();) {
    if (now < it->second.deadline_ms) {
      ++it;
      continue;
    }
    // Waited past the join timeout: the partner side is lost, go one-sided.
    const std::optional<TupleEnvelope>& held = it->second.face ? it->second.face
                                                              : it->second.person;
    if (held) {
      Frame frame = decode_frame(*(*held).payload);
      TupleEnvelope anchors[1] = {*held};
      emit_labelled(out, frame, anchors);
      out.ack(*held);
    }
    it = slots_.erase(it);
  }
}

void LabellerBolt::flush(runtime::BoltOutput& out) {
  // Anything still parked belongs to tuple trees that already failed or
  // were replaced; emission is closed, so just let the copies go.
  for (auto& [key, slot] : slots_) {
    if (slot.face) out.ack(*slot.face);
    if (slot.person) out.ack(*slot.person);
  }
  slots_.clear();
}

void ExportBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& /*out*/) {
  Frame frame = decode_frame(*input.payload);
  if (input.stream_name == kEligibleStream) {
    writer_->write_frame(frame, sink::Category::kEligible);
    return;
  }
  if (feature_nonempty(frame, "face")) writer_->write_frame(frame, sink::Category::kFace);
  if (feature_nonempty(frame, "person")) writer_->write_frame(frame, sink::Category::kPerson);
}

void ChunkerBolt::execute(const TupleEnvelope& input, runtime::BoltOutput& out) {
  (void)input;
  (void)out;
  throw InvariantViolation("the chunker takes no input streams");
}

void ChunkerBolt::on_tick(runtime::BoltOutput& out) {
  (void)out;
  chunker_->poll_and_chunk();
}

void ChunkerBolt::flush(runtime::BoltOutput& out) {
  (void)out;
  chunker_->poll_and_chunk();
  chunker_->flush();
}

TopologySpec surveillance_topology_spec(const PipelineSettings& settings) {
  auto parallelism_of = [&](const char* node, uint32_t fallback) -> uint32_t {
    auto it = settings.parallelism.find(node);
    return it != settings.parallelism.end() ? it->second : fallback;
  };
  for (const char* fixed : {kFetcher, kVideoExport}) {
    auto it = settings.parallelism.find(fixed);
    if (it != settings.parallelism.end() && it->second != 1)
      throw ConfigError(std::string("parallelism for ") + fixed + " must be 1");
  }
  TopologySpec spec;
  spec.message_timeout_ms = settings.message_timeout_ms;
  spec.queue_capacity = settings.queue_capacity;
  spec.nodes = {
      {kFetcher, NodeKind::kSpout, 1},
      {kBgSub, NodeKind::kBolt, parallelism_of(kBgSub, 1)},
      {kFaceDetect, NodeKind::kBolt, parallelism_of(kFaceDetect, 1)},
      {kPersonDetect, NodeKind::kBolt, parallelism_of(kPersonDetect, 1)},
      {kLabeller, NodeKind::kBolt, parallelism_of(kLabeller, 1)},
      {kExport, NodeKind::kBolt, parallelism_of(kExport, 1)},
      {kVideoExport, NodeKind::kBolt, 1},
  };
  spec.edges = {
      {kFetcher, kRawStream, kBgSub, Grouping::fields("streamId")},
      {kBgSub, kEligibleStream, kExport, Grouping::fields("streamId")},
      {kBgSub, kDetectStream, kFaceDetect, Grouping::shuffle()},
      {kBgSub, kDetectStream, kPersonDetect, Grouping::shuffle()},
      {kFaceDetect, kFacesStream, kLabeller, Grouping::fields("streamId")},
      {kPersonDetect, kPersonsStream, kLabeller, Grouping::fields("streamId")},
      {kLabeller, kLabelledStream, kExport, Grouping::fields("streamId")},
  };
  return spec;
}

runtime::Topology build_surveillance_topology(const PipelineSettings& settings) {
  if (!settings.face_model) throw ConfigError("face model not loaded");
  if (!settings.person_model) throw ConfigError("person model not loaded");
  detect::validate_scan_params(settings.scan);
  runtime::RuntimeOptions options = settings.runtime;
  options.schema = runtime::frame_payload_schema();
  runtime::Topology topology =
      runtime::build_topology(surveillance_topology_spec(settings), std::move(options));

  auto source = settings.source;
  topology.set_spout(kFetcher, [source](uint32_t) { return std::make_unique<FrameFetcher>(source); });
  auto bg = settings.bgsub;
  topology.set_bolt(kBgSub, [bg](uint32_t) { return std::make_unique<BgSubBolt>(bg); });
  auto face_model = settings.face_model;
  auto scan = settings.scan;
  topology.set_bolt(kFaceDetect, [face_model, scan](uint32_t) {
    return std::make_unique<FaceDetectBolt>(face_model, scan);
  });
  auto person_model = settings.person_model;
  topology.set_bolt(kPersonDetect, [person_model, scan](uint32_t) {
    return std::make_unique<PersonDetectBolt>(person_model, scan);
  });
  int64_t join_timeout = settings.join_timeout_ms;
  topology.set_bolt(kLabeller,
                    [join_timeout](uint32_t) { return std::make_unique<LabellerBolt>(join_timeout); });
  auto writer = std::make_shared<sink::FrameWriter>(settings.sink);
  topology.set_bolt(kExport, [writer](uint32_t) { return std::make_unique<ExportBolt>(writer); });
  auto sink_cfg = settings.sink;
  auto chunk_cfg = settings.chunker;
  topology.set_bolt(kVideoExport, [sink_cfg, chunk_cfg](uint32_t) {
    auto chunker = std::make_shared<sink::Chunker>(sink_cfg, chunk_cfg);
    return std::make_unique<ChunkerBolt>(chunker,
                                         static_cast<int64_t>(chunk_cfg.poll_interval_ms));
  });
  return topology;
}

}  // namespace vigil::pipeline
