#include "vigil/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vigil/errors.hpp"

namespace vigil::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key_path, const std::string& what) {
  throw ConfigError(key_path + ": " + what);
}

std::string join_key(const std::string& prefix, const char* key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known) fail(join_key(prefix, key.c_str()), "unknown key");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json* find_object(const json& obj, const std::string& prefix, const char* key) {
  const json* v = find(obj, key);
  if (v && !v->is_object()) fail(join_key(prefix, key), "expected an object");
  return v;
}

int64_t read_int(const json& obj, const std::string& prefix, const char* key, int64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(join_key(prefix, key), "expected an integer");
  return v->get<int64_t>();
}

uint64_t read_uint(const json& obj, const std::string& prefix, const char* key,
                   uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<int64_t>() >= 0))
    fail(join_key(prefix, key), "expected a non-negative integer");
  return v->get<uint64_t>();
}

double read_real(const json& obj, const std::string& prefix, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(join_key(prefix, key), "expected a number");
  return v->get<double>();
}

std::string read_string(const json& obj, const std::string& prefix, const char* key,
                        const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(join_key(prefix, key), "expected a string");
  return v->get<std::string>();
}

bool read_bool(const json& obj, const std::string& prefix, const char* key, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(join_key(prefix, key), "expected a boolean");
  return v->get<bool>();
}

void parse_source(const json& obj, FetcherConfig& out) {
  reject_unknown(obj, "source", {"kind", "path", "frameIntervalMs", "frameSkip", "streamId"});
  std::string kind = read_string(obj, "source", "kind", "directory");
  if (kind == "directory")
    out.source_kind = FetcherConfig::SourceKind::kDirectory;
  else if (kind == "rawPipe")
    out.source_kind = FetcherConfig::SourceKind::kRawPipe;
  else
    fail("source.kind", "expected \"directory\" or \"rawPipe\"");
  out.path = read_string(obj, "source", "path", out.path.string());
  out.frame_interval_ms = read_int(obj, "source", "frameIntervalMs", out.frame_interval_ms);
  out.frame_skip = static_cast<uint32_t>(read_uint(obj, "source", "frameSkip", out.frame_skip));
  out.stream_id = read_string(obj, "source", "streamId", out.stream_id);
}

void parse_scan(const json& obj, detect::ScanParams& out) {
  reject_unknown(obj, "scan",
                 {"scaleFactor", "windowStride", "minWidth", "minHeight", "maxWidth", "maxHeight",
                  "nmsIouThreshold"});
  out.scale_factor = read_real(obj, "scan", "scaleFactor", out.scale_factor);
  out.window_stride =
      static_cast<uint32_t>(read_uint(obj, "scan", "windowStride", out.window_stride));
  out.min_width = static_cast<uint32_t>(read_uint(obj, "scan", "minWidth", out.min_width));
  out.min_height = static_cast<uint32_t>(read_uint(obj, "scan", "minHeight", out.min_height));
  out.max_width = static_cast<uint32_t>(read_uint(obj, "scan", "maxWidth", out.max_width));
  out.max_height = static_cast<uint32_t>(read_uint(obj, "scan", "maxHeight", out.max_height));
  out.nms_iou_threshold = read_real(obj, "scan", "nmsIouThreshold", out.nms_iou_threshold);
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  PipelineConfig cfg;
  reject_unknown(doc, "",
                 {"source", "bgsub", "faceModelPath", "personModelPath", "scan", "sink", "chunker",
                  "runtime"});
  if (const json* obj = find_object(doc, "", "source")) parse_source(*obj, cfg.source);
  if (const json* obj = find_object(doc, "", "bgsub")) {
    reject_unknown(*obj, "bgsub", {"alpha", "diffThreshold", "minBlobRatio"});
    cfg.bgsub.alpha = read_real(*obj, "bgsub", "alpha", cfg.bgsub.alpha);
    cfg.bgsub.gate.diff_threshold = static_cast<int>(
        read_int(*obj, "bgsub", "diffThreshold", cfg.bgsub.gate.diff_threshold));
    cfg.bgsub.gate.min_blob_ratio =
        read_real(*obj, "bgsub", "minBlobRatio", cfg.bgsub.gate.min_blob_ratio);
  }
  cfg.face_model_path = read_string(doc, "", "faceModelPath", cfg.face_model_path);
  cfg.person_model_path = read_string(doc, "", "personModelPath", cfg.person_model_path);
  if (const json* obj = find_object(doc, "", "scan")) parse_scan(*obj, cfg.scan);
  if (const json* obj = find_object(doc, "", "sink")) {
    reject_unknown(*obj, "sink", {"outRoot"});
    cfg.sink.out_root = read_string(*obj, "sink", "outRoot", cfg.sink.out_root);
  }
  if (const json* obj = find_object(doc, "", "chunker")) {
    reject_unknown(*obj, "chunker", {"frameRateFps", "desiredVideoLengthS", "pollIntervalMs"});
    cfg.chunker.frame_rate_fps =
        read_real(*obj, "chunker", "frameRateFps", cfg.chunker.frame_rate_fps);
    cfg.chunker.desired_video_length_s =
        read_real(*obj, "chunker", "desiredVideoLengthS", cfg.chunker.desired_video_length_s);
    cfg.chunker.poll_interval_ms = static_cast<uint32_t>(
        read_uint(*obj, "chunker", "pollIntervalMs", cfg.chunker.poll_interval_ms));
  }
  if (const json* obj = find_object(doc, "", "runtime")) {
    reject_unknown(*obj, "runtime",
                   {"parallelism", "messageTimeoutMs", "queueCapacity", "workerCount",
                    "deterministic", "seed", "joinTimeoutMs", "pendingCapacity"});
    if (const json* par = find_object(*obj, "runtime", "parallelism")) {
      for (const auto& [key, value] : par->items()) {
        bool known = false;
        for (const char* node :
             {pipeline::kBgSub, pipeline::kFaceDetect, pipeline::kPersonDetect,
              pipeline::kLabeller, pipeline::kExport})
          if (key == node) known = true;
        if (!known) fail("runtime.parallelism." + key, "not an adjustable node");
        if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<int64_t>() > 0))
          fail("runtime.parallelism." + key, "expected a positive integer");
        cfg.parallelism[key] = value.get<uint32_t>();
      }
    }
    cfg.message_timeout_ms =
        read_int(*obj, "runtime", "messageTimeoutMs", cfg.message_timeout_ms);
    cfg.queue_capacity =
        static_cast<uint32_t>(read_uint(*obj, "runtime", "queueCapacity", cfg.queue_capacity));
    cfg.worker_count =
        static_cast<uint32_t>(read_uint(*obj, "runtime", "workerCount", cfg.worker_count));
    cfg.deterministic = read_bool(*obj, "runtime", "deterministic", cfg.deterministic);
    cfg.seed = read_uint(*obj, "runtime", "seed", cfg.seed);
    cfg.join_timeout_ms = read_int(*obj, "runtime", "joinTimeoutMs", cfg.join_timeout_ms);
    cfg.pending_capacity = static_cast<uint32_t>(
        read_uint(*obj, "runtime", "pendingCapacity", cfg.pending_capacity));
  }
  check_config(cfg);
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  json doc;
  doc["source"] = {
      {"kind",
       cfg.source.source_kind == FetcherConfig::SourceKind::kDirectory ? "directory" : "rawPipe"},
      {"path", cfg.source.path.string()},
      {"frameIntervalMs", cfg.source.frame_interval_ms},
      {"frameSkip", cfg.source.frame_skip},
      {"streamId", cfg.source.stream_id},
  };
  doc["bgsub"] = {
      {"alpha", cfg.bgsub.alpha},
      {"diffThreshold", cfg.bgsub.gate.diff_threshold},
      {"minBlobRatio", cfg.bgsub.gate.min_blob_ratio},
  };
  doc["faceModelPath"] = cfg.face_model_path;
  doc["personModelPath"] = cfg.person_model_path;
  doc["scan"] = {
      {"scaleFactor", cfg.scan.scale_factor},
      {"windowStride", cfg.scan.window_stride},
      {"minWidth", cfg.scan.min_width},
      {"minHeight", cfg.scan.min_height},
      {"maxWidth", cfg.scan.max_width},
      {"maxHeight", cfg.scan.max_height},
      {"nmsIouThreshold", cfg.scan.nms_iou_threshold},
  };
  doc["sink"] = {{"outRoot", cfg.sink.out_root}};
  doc["chunker"] = {
      {"frameRateFps", cfg.chunker.frame_rate_fps},
      {"desiredVideoLengthS", cfg.chunker.desired_video_length_s},
      {"pollIntervalMs", cfg.chunker.poll_interval_ms},
  };
  json par = json::object();
  for (const auto& [node, count] : cfg.parallelism) par[node] = count;
  doc["runtime"] = {
      {"parallelism", par},
      {"messageTimeoutMs", cfg.message_timeout_ms},
      {"queueCapacity", cfg.queue_capacity},
      {"workerCount", cfg.worker_count},
      {"deterministic", cfg.deterministic},
      {"seed", cfg.seed},
      {"joinTimeoutMs", cfg.join_timeout_ms},
      {"pendingCapacity", cfg.pending_capacity},
  };
  return doc.dump(2) + "\n";
}

void check_config(const PipelineConfig& cfg) {
  if (cfg.source.frame_interval_ms < 0) fail("source.frameIntervalMs", "must be non-negative");
  if (cfg.source.stream_id.empty()) fail("source.streamId", "must be non-empty");
  if (!(cfg.bgsub.alpha > 0.0 && cfg.bgsub.alpha <= 1.0)) fail("bgsub.alpha", "must be in (0, 1]");
  if (cfg.bgsub.gate.diff_threshold < 1 || cfg.bgsub.gate.diff_threshold > 255)
    fail("bgsub.diffThreshold", "must be in [1, 255]");
  if (!(cfg.bgsub.gate.min_blob_ratio > 0.0 && cfg.bgsub.gate.min_blob_ratio < 1.0))
    fail("bgsub.minBlobRatio", "must be in (0, 1)");
  if (!(cfg.scan.scale_factor > 1.0)) fail("scan.scaleFactor", "must be greater than 1");
  if (cfg.scan.window_stride < 1) fail("scan.windowStride", "must be positive");
  if (cfg.scan.max_width != 0 && cfg.scan.min_width > cfg.scan.max_width)
    fail("scan.minWidth", "exceeds scan.maxWidth");
  if (cfg.scan.max_height != 0 && cfg.scan.min_height > cfg.scan.max_height)
    fail("scan.minHeight", "exceeds scan.maxHeight");
  if (!(cfg.scan.nms_iou_threshold > 0.0 && cfg.scan.nms_iou_threshold < 1.0))
    fail("scan.nmsIouThreshold", "must be in (0, 1)");
  if (cfg.sink.out_root.empty()) fail("sink.outRoot", "must be non-empty");
  if (!(cfg.chunker.frame_rate_fps > 0.0)) fail("chunker.frameRateFps", "must be positive");
  if (!(cfg.chunker.desired_video_length_s > 0.0))
    fail("chunker.desiredVideoLengthS", "must be positive");
  if (cfg.chunker.poll_interval_ms < 1) fail("chunker.pollIntervalMs", "must be positive");
  if (std::llround(cfg.chunker.frame_rate_fps * cfg.chunker.desired_video_length_s) < 1)
    fail("chunker.frameRateFps", "fps * length rounds to zero frames");
  for (const auto& [node, count] : cfg.parallelism)
    if (count < 1) fail("runtime.parallelism." + node, "must be positive");
  if (cfg.message_timeout_ms < 1) fail("runtime.messageTimeoutMs", "must be positive");
  if (cfg.queue_capacity < 1) fail("runtime.queueCapacity", "must be positive");
  if (cfg.worker_count < 1) fail("runtime.workerCount", "must be positive");
  if (cfg.join_timeout_ms < 1) fail("runtime.joinTimeoutMs", "must be positive");
  if (cfg.pending_capacity < 1) fail("runtime.pendingCapacity", "must be positive");
}

pipeline::PipelineSettings to_settings(const PipelineConfig& cfg) {
  check_config(cfg);
  if (cfg.face_model_path.empty()) fail("faceModelPath", "must be set");
  if (cfg.person_model_path.empty()) fail("personModelPath", "must be set");
  if (cfg.source.path.empty()) fail("source.path", "must be set");
  namespace fs = std::filesystem;
  if (!fs::exists(cfg.source.path))
    fail("source.path", "does not exist: " + cfg.source.path.string());
  pipeline::PipelineSettings settings;
  settings.source = cfg.source;
  settings.bgsub = cfg.bgsub;
  try {
    settings.face_model =
        std::make_shared<detect::HaarCascadeModel>(detect::load_cascade(cfg.face_model_path));
  } catch (const Error& e) {
    fail("faceModelPath", e.what());
  }
  try {
    settings.person_model =
        std::make_shared<detect::HogModel>(detect::load_hog_model(cfg.person_model_path));
  } catch (const Error& e) {
    fail("personModelPath", e.what());
  }
  settings.scan = cfg.scan;
  settings.sink = cfg.sink;
  settings.chunker = cfg.chunker;
  settings.join_timeout_ms = cfg.join_timeout_ms;
  settings.parallelism = cfg.parallelism;
  settings.message_timeout_ms = cfg.message_timeout_ms;
  settings.queue_capacity = cfg.queue_capacity;
  settings.runtime.worker_count = cfg.worker_count;
  settings.runtime.deterministic = cfg.deterministic;
  settings.runtime.seed = cfg.seed;
  settings.runtime.pending_capacity = cfg.pending_capacity;
  return settings;
}

}  // namespace vigil::config
