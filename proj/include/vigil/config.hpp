#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vigil/pipeline.hpp"

namespace vigil::config {

// The full pipeline configuration as carried by the JSON config file.
// Every field has a default; parsing fills in whatever the document omits,
// so serialize(parse(doc)) always spells the effective settings out.
struct PipelineConfig {
  FetcherConfig source;
  pipeline::BgSubSettings bgsub;
  std::string face_model_path;
  std::string person_model_path;
  detect::ScanParams scan;
  sink::SinkConfig sink{"out"};
  sink::ChunkerConfig chunker;
  std::map<std::string, uint32_t> parallelism{
      {"bgsub", 1}, {"faceDetect", 1}, {"personDetect", 1}, {"labeller", 1}, {"export", 1}};
  int64_t message_timeout_ms = 5000;
  uint32_t queue_capacity = 256;
  uint32_t worker_count = 4;
  bool deterministic = false;
  uint64_t seed = runtime::RuntimeOptions{}.seed;
  int64_t join_timeout_ms = 1000;
  uint32_t pending_capacity = 64;
};

// Parses and range-checks a config document. Errors name the offending key
// (e.g. "bgsub.alpha: must be in (0, 1]"). Unknown keys are rejected so
// typos fail loudly instead of silently using a default.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config_file(const std::string& path);

// Pretty-printed JSON with every field explicit.
std::string serialize_config(const PipelineConfig& cfg);

// Range checks only; file existence is checked by to_settings.
void check_config(const PipelineConfig& cfg);

// Resolves paths and loads both detector models. Throws ConfigError naming
// the key whose file is missing or malformed.
pipeline::PipelineSettings to_settings(const PipelineConfig& cfg);

}  // namespace vigil::config
