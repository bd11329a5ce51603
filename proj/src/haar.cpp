#include "vigil/haar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "token_reader.hpp"
#include "vigil/bgsub.hpp"
#include "vigil/errors.hpp"

namespace vigil::detect {

namespace {

void validate_cascade(const HaarCascadeModel& model) {
  if (model.base_width == 0 || model.base_height == 0) {
    throw InvariantViolation("cascade base window must be nonzero");
  }
  if (model.stages.empty()) throw InvariantViolation("cascade needs at least one stage");
  for (const CascadeStage& stage : model.stages) {
    if (stage.weak.empty()) throw InvariantViolation("cascade stage needs weak classifiers");
    for (const WeakClassifier& weak : stage.weak) {
      if (weak.rects.empty() || weak.rects.size() > 3) {
        throw InvariantViolation("weak classifier needs 1..3 rects");
      }
      for (const HaarRect& r : weak.rects) {
        if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 ||
            static_cast<int64_t>(r.x) + r.w > model.base_width ||
            static_cast<int64_t>(r.y) + r.h > model.base_height) {
          throw InvariantViolation("cascade rect outside base window");
        }
      }
    }
  }
}

}  // namespace

void validate_scan_params(const ScanParams& params) {
  if (!(params.scale_factor > 1.0)) throw InvariantViolation("scaleFactor must exceed 1");
  if (params.window_stride < 1) throw InvariantViolation("windowStride must be positive");
  if (!(params.nms_iou_threshold > 0.0) || !(params.nms_iou_threshold < 1.0)) {
    throw InvariantViolation("nmsIouThreshold must lie in (0,1)");
  }
  if (params.max_width != 0 && params.min_width > params.max_width) {
    throw InvariantViolation("minSize wider than maxSize");
  }
  if (params.max_height != 0 && params.min_height > params.max_height) {
    throw InvariantViolation("minSize taller than maxSize");
  }
}

HaarCascadeModel parse_cascade(std::istream& in) {
  TokenReader tokens(in);
  std::string magic = tokens.next("HAAR1 magic");
  if (magic != "HAAR1") throw BadModelFile("cascade file must start with HAAR1");

  HaarCascadeModel model;
  long long w0 = tokens.integer("base width");
  long long h0 = tokens.integer("base height");
  long long n_stages = tokens.integer("stage count");
  if (w0 < 1 || h0 < 1 || w0 > std::numeric_limits<int32_t>::max() ||
      h0 > std::numeric_limits<int32_t>::max()) {
    throw BadModelFile("cascade base window out of range");
  }
  if (n_stages < 1 || n_stages > 10000) throw BadModelFile("cascade stage count out of range");
  model.base_width = static_cast<uint32_t>(w0);
  model.base_height = static_cast<uint32_t>(h0);

  for (long long s = 0; s < n_stages; ++s) {
    tokens.expect("STAGE");
    CascadeStage stage;
    stage.stage_threshold = tokens.real("stage threshold");
    long long n_weak = tokens.integer("weak classifier count");
    if (n_weak < 1 || n_weak > 100000) throw BadModelFile("weak classifier count out of range");
    for (long long c = 0; c < n_weak; ++c) {
      tokens.expect("WEAK");
      WeakClassifier weak;
      long long n_rects = tokens.integer("rect count");
      if (n_rects < 1 || n_rects > 3) throw BadModelFile("weak classifier needs 1..3 rects");
      weak.feature_threshold = tokens.real("feature threshold");
      weak.left_value = tokens.real("left value");
      weak.right_value = tokens.real("right value");
      for (long long r = 0; r < n_rects; ++r) {
        HaarRect rect;
        long long x = tokens.integer("rect x");
        long long y = tokens.integer("rect y");
        long long w = tokens.integer("rect w");
        long long h = tokens.integer("rect h");
        rect.weight = tokens.real("rect weight");
        if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > w0 || y + h > h0) {
          throw BadModelFile("cascade rect outside base window");
        }
        rect.x = static_cast<int32_t>(x);
        rect.y = static_cast<int32_t>(y);
        rect.w = static_cast<int32_t>(w);
        rect.h = static_cast<int32_t>(h);
        weak.rects.push_back(rect);
      }
      stage.weak.push_back(std::move(weak));
    }
    model.stages.push_back(std::move(stage));
  }

  std::string trailing;
  if (tokens.try_next(trailing)) {
    throw BadModelFile("trailing content after cascade definition: '" + trailing + "'");
  }
  return model;
}

HaarCascadeModel load_cascade(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadModelFile("cannot open cascade file: " + path);
  return parse_cascade(in);
}

void write_cascade(std::ostream& out, const HaarCascadeModel& model) {
  validate_cascade(model);
  out << "HAAR1 " << model.base_width << ' ' << model.base_height << ' ' << model.stages.size()
      << '\n';
  out.precision(17);
  for (const CascadeStage& stage : model.stages) {
    out << "STAGE " << stage.stage_threshold << ' ' << stage.weak.size() << '\n';
    for (const WeakClassifier& weak : stage.weak) {
      out << "WEAK " << weak.rects.size() << ' ' << weak.feature_threshold << ' '
          << weak.left_value << ' ' << weak.right_value << '\n';
      for (const HaarRect& r : weak.rects) {
        out << r.x << ' ' << r.y << ' ' << r.w << ' ' << r.h << ' ' << r.weight << '\n';
      }
    }
  }
}

double window_variance_norm(const IntegralImage& ii, uint32_t x, uint32_t y, uint32_t w,
                            uint32_t h) {
  const double area = static_cast<double>(w) * h;
  const double mean = static_cast<double>(ii.rect_sum(x, y, w, h)) / area;
  const double mean_sq = static_cast<double>(ii.rect_sq_sum(x, y, w, h)) / area;
  double variance = mean_sq - mean * mean;
  if (variance < 0.0) variance = 0.0;
  double stddev = std::sqrt(variance);
  if (stddev < 1e-9) stddev = 1.0;
  return stddev * area;
}

bool eval_stage(const IntegralImage& ii, uint32_t origin_x, uint32_t origin_y, uint32_t window_w,
                uint32_t window_h, double scale, const CascadeStage& stage, double variance_norm,
                EvalCounters* counters) {
  if (counters) ++counters->stage_evals;
  double sum = 0.0;
  for (const WeakClassifier& weak : stage.weak) {
    if (counters) ++counters->weak_evals;
    double feature = 0.0;
    for (const HaarRect& r : weak.rects) {
      uint32_t sx = static_cast<uint32_t>(std::llround(r.x * scale));
      uint32_t sy = static_cast<uint32_t>(std::llround(r.y * scale));
      uint32_t sw = static_cast<uint32_t>(std::llround(r.w * scale));
      uint32_t sh = static_cast<uint32_t>(std::llround(r.h * scale));
      sx = std::min(sx, window_w);
      sy = std::min(sy, window_h);
      sw = std::min(sw, window_w - sx);
      sh = std::min(sh, window_h - sy);
      if (sw == 0 || sh == 0) continue;
      feature += r.weight * static_cast<double>(ii.rect_sum(origin_x + sx, origin_y + sy, sw, sh));
    }
    sum += feature < weak.feature_threshold * variance_norm ? weak.left_value : weak.right_value;
  }
  return sum >= stage.stage_threshold;
}

std::vector<Descriptor> detect_multiscale_cascade(const Frame& frame,
                                                  const HaarCascadeModel& model,
                                                  const ScanParams& params,
                                                  EvalCounters* counters) {
  validate_cascade(model);
  validate_scan_params(params);

  Frame gray = bgsub::to_grayscale(frame);
  IntegralImage ii = integral_image(gray);

  const uint32_t image_w = gray.width;
  const uint32_t image_h = gray.height;
  const uint32_t max_w = params.max_width ? std::min(params.max_width, image_w) : image_w;
  const uint32_t max_h = params.max_height ? std::min(params.max_height, image_h) : image_h;

  std::vector<ScoredBox> raws;
  for (int k = 0;; ++k) {
    double scale = std::pow(params.scale_factor, k);
    uint32_t wk = static_cast<uint32_t>(std::llround(model.base_width * scale));
    uint32_t hk = static_cast<uint32_t>(std::llround(model.base_height * scale));
    if (wk > max_w || hk > max_h) break;
    if (wk < params.min_width || hk < params.min_height) continue;

    for (uint32_t y = 0; y + hk <= image_h; y += params.window_stride) {
      for (uint32_t x = 0; x + wk <= image_w; x += params.window_stride) {
        double variance_norm = window_variance_norm(ii, x, y, wk, hk);
        bool hit = true;
        for (const CascadeStage& stage : model.stages) {
          if (!eval_stage(ii, x, y, wk, hk, scale, stage, variance_norm, counters)) {
            hit = false;
            break;
          }
        }
        if (hit) raws.push_back({Rect{x, y, wk, hk}, 1.0});
      }
    }
  }

  if (raws.empty()) return {};

  NmsResult merged = nms_indices(raws, params.nms_iou_threshold);
  std::vector<Descriptor> out;
  out.reserve(merged.kept.size());
  for (size_t i = 0; i < merged.kept.size(); ++i) {
    double confidence =
        static_cast<double>(merged.merged_counts[i]) / static_cast<double>(raws.size());
    confidence = std::clamp(confidence, 0.0, 1.0);
    out.push_back(Descriptor{raws[merged.kept[i]].bbox, "face", confidence});
  }
  return out;
}

}  // namespace vigil::detect
