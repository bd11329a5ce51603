#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::detect {

struct ScoredBox {
  Rect bbox;
  double score = 0.0;

  bool operator==(const ScoredBox&) const = default;
};

double iou(const Rect& a, const Rect& b);

struct NmsResult {
  // Indices into the input span, in keep order (best first).
  std::vector<size_t> kept;
  // For each kept box: itself plus every input box it suppressed.
  std::vector<size_t> merged_counts;
};

// Greedy suppression: visit boxes by descending score (ties broken by bbox
// (x,y,w,h) so the result is a pure function of the input set), keep a box,
// drop everything overlapping a kept box with IoU strictly above the
// threshold.
NmsResult nms_indices(std::span<const ScoredBox> boxes, double iou_threshold);

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold);

}  // namespace vigil::detect
