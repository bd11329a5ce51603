#include "vigil/nms.hpp"

#include <algorithm>
#include <tuple>

#include "vigil/errors.hpp"

namespace vigil::detect {

double iou(const Rect& a, const Rect& b) {
  uint64_t ax2 = static_cast<uint64_t>(a.x) + a.w;
  uint64_t ay2 = static_cast<uint64_t>(a.y) + a.h;
  uint64_t bx2 = static_cast<uint64_t>(b.x) + b.w;
  uint64_t by2 = static_cast<uint64_t>(b.y) + b.h;
  uint64_t ix1 = std::max<uint64_t>(a.x, b.x);
  uint64_t iy1 = std::max<uint64_t>(a.y, b.y);
  uint64_t ix2 = std::min(ax2, bx2);
  uint64_t iy2 = std::min(ay2, by2);
  if (ix2 <= ix1 || iy2 <= iy1) return 0.0;
  uint64_t inter = (ix2 - ix1) * (iy2 - iy1);
  uint64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

NmsResult nms_indices(std::span<const ScoredBox> boxes, double iou_threshold) {
  if (!(iou_threshold > 0.0) || !(iou_threshold < 1.0)) {
    throw InvariantViolation("IoU threshold must lie in (0,1)");
  }

  std::vector<size_t> order(boxes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (boxes[a].score != boxes[b].score) return boxes[a].score > boxes[b].score;
    const Rect& ra = boxes[a].bbox;
    const Rect& rb = boxes[b].bbox;
    return std::tie(ra.x, ra.y, ra.w, ra.h) < std::tie(rb.x, rb.y, rb.w, rb.h);
  });

  NmsResult result;
  std::vector<uint8_t> dead(boxes.size(), 0);
  for (size_t oi = 0; oi < order.size(); ++oi) {
    size_t i = order[oi];
    if (dead[i]) continue;
    size_t merged = 1;
    for (size_t oj = oi + 1; oj < order.size(); ++oj) {
      size_t j = order[oj];
      if (dead[j]) continue;
      if (iou(boxes[i].bbox, boxes[j].bbox) > iou_threshold) {
        dead[j] = 1;
        ++merged;
      }
    }
    result.kept.push_back(i);
    result.merged_counts.push_back(merged);
  }
  return result;
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold) {
  NmsResult r = nms_indices(boxes, iou_threshold);
  std::vector<ScoredBox> out;
  out.reserve(r.kept.size());
  for (size_t i : r.kept) out.push_back(boxes[i]);
  return out;
}

}  // namespace vigil::detect
