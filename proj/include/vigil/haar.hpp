#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vigil/integral.hpp"
#include "vigil/model.hpp"
#include "vigil/nms.hpp"

namespace vigil::detect {

struct HaarRect {
  int32_t x = 0, y = 0, w = 0, h = 0;
  double weight = 0.0;
};

// One boosted decision stump: weighted rectangle-sum feature against a
// variance-normalized threshold.
struct WeakClassifier {
  std::vector<HaarRect> rects;  // 1..3, all inside the base window
  double feature_threshold = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;
};

struct CascadeStage {
  double stage_threshold = 0.0;
  std::vector<WeakClassifier> weak;
};

struct HaarCascadeModel {
  uint32_t base_width = 0;
  uint32_t base_height = 0;
  std::vector<CascadeStage> stages;
};

// Sliding-window search space shared by both detectors. A zero min/max
// dimension means "no constraint beyond the model window / the image".
struct ScanParams {
  double scale_factor = 1.1;
  uint32_t window_stride = 8;
  uint32_t min_width = 0;
  uint32_t min_height = 0;
  uint32_t max_width = 0;
  uint32_t max_height = 0;
  double nms_iou_threshold = 0.3;
};

void validate_scan_params(const ScanParams& params);

// Counts stage and weak-classifier evaluations; lets tests observe that a
// window rejected at stage k never reaches stage k+1.
struct EvalCounters {
  uint64_t stage_evals = 0;
  uint64_t weak_evals = 0;
};

// Text model format, '#' comment lines ignored:
//   HAAR1 w0 h0 nStages
//   STAGE threshold nWeak
//   WEAK nRects fThresh left right
//   x y w h weight          (nRects lines)
HaarCascadeModel parse_cascade(std::istream& in);
HaarCascadeModel load_cascade(const std::string& path);
void write_cascade(std::ostream& out, const HaarCascadeModel& model);

// stddev of the window's pixels (floored to 1.0 near zero so flat windows
// stay well-defined) times the window area; the feature threshold scales by
// this, which is what makes stumps trained on normalized patches transfer.
double window_variance_norm(const IntegralImage& ii, uint32_t x, uint32_t y, uint32_t w,
                            uint32_t h);

// Stage vote at one window placement. Rect coordinates scale by `scale` and
// clamp to the scaled window so rounding can never read outside it.
bool eval_stage(const IntegralImage& ii, uint32_t origin_x, uint32_t origin_y, uint32_t window_w,
                uint32_t window_h, double scale, const CascadeStage& stage, double variance_norm,
                EvalCounters* counters = nullptr);

// Full scan: windows grow by scale_factor per level at a fixed pixel stride;
// a window passing every stage is a raw hit; NMS merges raw hits and each
// winner's confidence is its merged share of all raw hits.
std::vector<Descriptor> detect_multiscale_cascade(const Frame& frame,
                                                  const HaarCascadeModel& model,
                                                  const ScanParams& params,
                                                  EvalCounters* counters = nullptr);

}  // namespace vigil::detect
