#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "vigil/config.hpp"
#include "vigil/errors.hpp"
#include "vigil/haar.hpp"
#include "vigil/hog.hpp"

using namespace vigil;
using namespace vigil::config;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool fails_mentioning(const std::string& doc, const std::string& key) {
  std::string msg = message_of([&] { (void)parse_config(doc); });
  return msg.find(key) != std::string::npos;
}

}  // namespace

TEST_CASE("an empty document yields the documented defaults") {
  PipelineConfig cfg = parse_config("{}");
  CHECK(cfg.source.source_kind == FetcherConfig::SourceKind::kDirectory);
  CHECK(cfg.source.stream_id == "cam0");
  CHECK(cfg.source.frame_interval_ms == 0);
  CHECK(cfg.bgsub.alpha == doctest::Approx(0.05));
  CHECK(cfg.bgsub.gate.diff_threshold == 25);
  CHECK(cfg.bgsub.gate.min_blob_ratio == doctest::Approx(0.10));
  CHECK(cfg.scan.scale_factor == doctest::Approx(1.1));
  CHECK(cfg.scan.window_stride == 8);
  CHECK(cfg.scan.nms_iou_threshold == doctest::Approx(0.3));
  CHECK(cfg.sink.out_root == "out");
  CHECK(cfg.chunker.frame_rate_fps == doctest::Approx(25.0));
  CHECK(cfg.chunker.desired_video_length_s == doctest::Approx(10.0));
  CHECK(cfg.chunker.batch_size() == 250);
  CHECK(cfg.parallelism.at("bgsub") == 1);
  CHECK(cfg.message_timeout_ms == 5000);
  CHECK(cfg.queue_capacity == 256);
  CHECK(cfg.worker_count == 4);
  CHECK_FALSE(cfg.deterministic);
  CHECK(cfg.join_timeout_ms == 1000);
  CHECK(cfg.pending_capacity == 64);
}

TEST_CASE("the default seed is spelled out in the serialized form") {
  std::string text = serialize_config(parse_config("{}"));
  CHECK(text.find("8532470125704856908") != std::string::npos);
}

TEST_CASE("serialization is a fixpoint under reparsing") {
  std::string doc = R"({
    "source": {"kind": "rawPipe", "path": "feed.bin", "frameIntervalMs": 33,
               "frameSkip": 2, "streamId": "gate2"},
    "bgsub": {"alpha": 0.2, "diffThreshold": 40, "minBlobRatio": 0.05},
    "faceModelPath": "models/face.txt",
    "personModelPath": "models/person.txt",
    "scan": {"scaleFactor": 1.25, "windowStride": 4, "minWidth": 32, "minHeight": 32,
             "maxWidth": 200, "maxHeight": 200, "nmsIouThreshold": 0.5},
    "sink": {"outRoot": "archive"},
    "chunker": {"frameRateFps": 30.0, "desiredVideoLengthS": 4.0, "pollIntervalMs": 100},
    "runtime": {"parallelism": {"bgsub": 3, "labeller": 2}, "messageTimeoutMs": 900,
                "queueCapacity": 64, "workerCount": 2, "deterministic": true,
                "seed": 42, "joinTimeoutMs": 250, "pendingCapacity": 16}
  })";
  std::string once = serialize_config(parse_config(doc));
  std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);

  PipelineConfig cfg = parse_config(once);
  CHECK(cfg.source.source_kind == FetcherConfig::SourceKind::kRawPipe);
  CHECK(cfg.source.path == "feed.bin");
  CHECK(cfg.source.frame_skip == 2);
  CHECK(cfg.bgsub.gate.diff_threshold == 40);
  CHECK(cfg.scan.max_width == 200);
  CHECK(cfg.chunker.batch_size() == 120);
  CHECK(cfg.parallelism.at("bgsub") == 3);
  CHECK(cfg.parallelism.at("labeller") == 2);
  CHECK(cfg.parallelism.at("faceDetect") == 1);  // untouched nodes keep the default
  CHECK(cfg.deterministic);
  CHECK(cfg.seed == 42);
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  CHECK(fails_mentioning(R"({"alpha": 0.1})", "alpha: unknown key"));
  CHECK(fails_mentioning(R"({"bgsub": {"alfa": 0.1}})", "bgsub.alfa"));
  CHECK(fails_mentioning(R"({"scan": {"stride": 4}})", "scan.stride"));
  CHECK(fails_mentioning(R"({"sink": {"folder": "x"}})", "sink.folder"));
  CHECK(fails_mentioning(R"({"runtime": {"workers": 2}})", "runtime.workers"));
  CHECK(fails_mentioning(R"({"runtime": {"parallelism": {"fetcher": 2}}})",
                         "runtime.parallelism.fetcher"));
  CHECK(fails_mentioning(R"({"runtime": {"parallelism": {"videoExport": 2}}})",
                         "runtime.parallelism.videoExport"));
}

TEST_CASE("wrongly typed values name the key and the expected type") {
  CHECK(fails_mentioning(R"({"bgsub": {"alpha": "high"}})", "bgsub.alpha"));
  CHECK(fails_mentioning(R"({"bgsub": {"alpha": "high"}})", "expected a number"));
  CHECK(fails_mentioning(R"({"runtime": {"deterministic": 1}})", "expected a boolean"));
  CHECK(fails_mentioning(R"({"source": {"frameSkip": -1}})", "non-negative"));
  CHECK(fails_mentioning(R"({"source": {"kind": "camera"}})", "source.kind"));
  CHECK(fails_mentioning(R"({"source": 3})", "expected an object"));
  CHECK(fails_mentioning(R"({"runtime": {"parallelism": {"bgsub": -2}}})", "positive"));
}

TEST_CASE("out of range values name the offending key") {
  CHECK(fails_mentioning(R"({"bgsub": {"alpha": 0.0}})", "bgsub.alpha"));
  CHECK(fails_mentioning(R"({"bgsub": {"alpha": 1.5}})", "bgsub.alpha"));
  CHECK(fails_mentioning(R"({"bgsub": {"diffThreshold": 0}})", "bgsub.diffThreshold"));
  CHECK(fails_mentioning(R"({"bgsub": {"diffThreshold": 300}})", "bgsub.diffThreshold"));
  CHECK(fails_mentioning(R"({"bgsub": {"minBlobRatio": 1.0}})", "bgsub.minBlobRatio"));
  CHECK(fails_mentioning(R"({"scan": {"scaleFactor": 1.0}})", "scan.scaleFactor"));
  CHECK(fails_mentioning(R"({"scan": {"windowStride": 0}})", "scan.windowStride"));
  CHECK(fails_mentioning(R"({"scan": {"minWidth": 64, "maxWidth": 32}})", "scan.minWidth"));
  CHECK(fails_mentioning(R"({"scan": {"nmsIouThreshold": 0.0}})", "scan.nmsIouThreshold"));
  CHECK(fails_mentioning(R"({"sink": {"outRoot": ""}})", "sink.outRoot"));
  CHECK(fails_mentioning(R"({"chunker": {"frameRateFps": 0}})", "chunker.frameRateFps"));
  CHECK(fails_mentioning(R"({"chunker": {"desiredVideoLengthS": -1}})",
                         "chunker.desiredVideoLengthS"));
  // a legal fps and length can still round to an empty batch
  CHECK(fails_mentioning(R"({"chunker": {"frameRateFps": 0.04, "desiredVideoLengthS": 1.0}})",
                         "rounds to zero"));
  CHECK(fails_mentioning(R"({"runtime": {"workerCount": 0}})", "runtime.workerCount"));
  CHECK(fails_mentioning(R"({"runtime": {"messageTimeoutMs": 0}})", "runtime.messageTimeoutMs"));
  CHECK(fails_mentioning(R"({"runtime": {"joinTimeoutMs": 0}})", "runtime.joinTimeoutMs"));
  CHECK(fails_mentioning(R"({"runtime": {"pendingCapacity": 0}})", "runtime.pendingCapacity"));
  CHECK(fails_mentioning(R"({"source": {"streamId": ""}})", "source.streamId"));
}

TEST_CASE("config text must be a JSON object") {
  CHECK(fails_mentioning("not json at all", "not valid JSON"));
  CHECK(fails_mentioning("[1, 2]", "root must be a JSON object"));
}

TEST_CASE("config files load from disk and missing files are reported") {
  testutil::TempDir dir("config");
  auto path = dir.path() / "pipeline.json";
  {
    std::ofstream out(path.string());
    out << R"({"sink": {"outRoot": "elsewhere"}})";
  }
  PipelineConfig cfg = load_config_file(path.string());
  CHECK(cfg.sink.out_root == "elsewhere");
  CHECK_THROWS_AS(load_config_file((dir.path() / "nope.json").string()), ConfigError);
}

TEST_CASE("turning a config into settings loads both detector models") {
  testutil::TempDir dir("config_settings");
  fs::create_directory(dir.path() / "frames");

  detect::HaarCascadeModel cascade;
  cascade.base_width = 20;
  cascade.base_height = 20;
  detect::CascadeStage stage;
  stage.stage_threshold = 0.5;
  stage.weak.push_back(detect::WeakClassifier{{detect::HaarRect{0, 0, 10, 10, 1.0}}, 0.1, -1.0, 1.0});
  cascade.stages.push_back(stage);
  {
    std::ofstream out((dir.path() / "face.txt").string());
    detect::write_cascade(out, cascade);
  }
  detect::HogModel hog;
  hog.svm_bias = -0.25;
  hog.hit_threshold = 0.1;
  hog.svm_weights.assign(detect::kHogDescriptorSize, 0.001);
  {
    std::ofstream out((dir.path() / "person.txt").string());
    detect::write_hog_model(out, hog);
  }

  PipelineConfig cfg = parse_config("{}");
  cfg.face_model_path = (dir.path() / "face.txt").string();
  cfg.person_model_path = (dir.path() / "person.txt").string();
  cfg.source.path = dir.path() / "frames";
  cfg.worker_count = 2;
  cfg.deterministic = true;

  pipeline::PipelineSettings settings = to_settings(cfg);
  REQUIRE(settings.face_model);
  CHECK(settings.face_model->base_width == 20);
  CHECK(settings.face_model->stages.size() == 1);
  REQUIRE(settings.person_model);
  CHECK(settings.person_model->svm_weights.size() == detect::kHogDescriptorSize);
  CHECK(settings.person_model->svm_bias == doctest::Approx(-0.25));
  CHECK(settings.runtime.worker_count == 2);
  CHECK(settings.runtime.deterministic);
  CHECK(settings.sink.out_root == "out");
}

TEST_CASE("settings conversion names whichever prerequisite is missing") {
  testutil::TempDir dir("config_missing");
  PipelineConfig cfg = parse_config("{}");
  CHECK(message_of([&] { (void)to_settings(cfg); }).find("faceModelPath") != std::string::npos);

  cfg.face_model_path = (dir.path() / "face.txt").string();
  CHECK(message_of([&] { (void)to_settings(cfg); }).find("personModelPath") != std::string::npos);

  cfg.person_model_path = (dir.path() / "person.txt").string();
  CHECK(message_of([&] { (void)to_settings(cfg); }).find("source.path") != std::string::npos);

  cfg.source.path = dir.path() / "absent";
  CHECK(message_of([&] { (void)to_settings(cfg); }).find("does not exist") != std::string::npos);

  // the source directory exists but the model file does not parse
  fs::create_directory(dir.path() / "absent");
  {
    std::ofstream out((dir.path() / "face.txt").string());
    out << "MAGIC? 1 2 3\n";
  }
  {
    std::ofstream out((dir.path() / "person.txt").string());
    out << "HOG1 0 0\n";  // weight vector missing
  }
  CHECK(message_of([&] { (void)to_settings(cfg); }).find("faceModelPath") != std::string::npos);
}
