#include "vigil/bgsub.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "vigil/errors.hpp"

namespace vigil::bgsub {

BackgroundModel::BackgroundModel(double learning_rate) : alpha(learning_rate) {
  if (!(learning_rate > 0.0) || !(learning_rate < 1.0)) {
    throw InvariantViolation("learning rate must lie in (0,1)");
  }
}

Frame to_grayscale(const Frame& frame) {
  validate_frame(frame);
  if (frame.channels == 1) return frame;

  Frame out = frame;
  out.channels = 1;
  out.pixels.resize(static_cast<size_t>(frame.width) * frame.height);
  const uint8_t* src = frame.pixels.data();
  for (size_t i = 0, n = out.pixels.size(); i < n; ++i, src += 3) {
    double y = 0.299 * src[0] + 0.587 * src[1] + 0.114 * src[2];
    out.pixels[i] = static_cast<uint8_t>(std::llround(y));
  }
  return out;
}

void accumulate_weighted(BackgroundModel& model, const Frame& gray) {
  if (gray.channels != 1) throw InvariantViolation("accumulate_weighted expects grayscale");
  if (!model.initialized) {
    model.width = gray.width;
    model.height = gray.height;
    model.accumulator.resize(gray.pixels.size());
    std::copy(gray.pixels.begin(), gray.pixels.end(), model.accumulator.begin());
    model.initialized = true;
    return;
  }
  if (gray.width != model.width || gray.height != model.height) {
    throw DimsMismatch("frame dimensions changed mid-stream");
  }
  const double a = model.alpha;
  for (size_t i = 0, n = model.accumulator.size(); i < n; ++i) {
    model.accumulator[i] = (1.0 - a) * model.accumulator[i] + a * gray.pixels[i];
  }
}

BinaryMask abs_diff_threshold(const BackgroundModel& model, const Frame& gray,
                              const BlobGateConfig& cfg) {
  if (!model.initialized) throw Uninitialized("background model has no frames yet");
  if (gray.channels != 1) throw InvariantViolation("abs_diff_threshold expects grayscale");
  if (gray.width != model.width || gray.height != model.height) {
    throw DimsMismatch("frame dimensions changed mid-stream");
  }
  if (cfg.diff_threshold < 1 || cfg.diff_threshold > 255) {
    throw InvariantViolation("diff threshold must lie in [1,255]");
  }

  BinaryMask mask;
  mask.width = model.width;
  mask.height = model.height;
  mask.data.resize(gray.pixels.size());
  for (size_t i = 0, n = gray.pixels.size(); i < n; ++i) {
    long bg = std::llround(model.accumulator[i]);
    long diff = std::labs(bg - static_cast<long>(gray.pixels[i]));
    mask.data[i] = diff > cfg.diff_threshold ? 255 : 0;
  }
  return mask;
}

std::vector<Blob> connected_components(const BinaryMask& mask) {
  const uint32_t w = mask.width;
  const uint32_t h = mask.height;
  std::vector<uint8_t> seen(mask.data.size(), 0);
  std::vector<Blob> blobs;

  // Plain BFS flood fill, 8-connected. Scan order makes labelling
  // deterministic; the final sort pins the output order regardless.
  std::deque<std::pair<uint32_t, uint32_t>> queue;
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      size_t idx = static_cast<size_t>(y) * w + x;
      if (mask.data[idx] == 0 || seen[idx]) continue;

      Blob blob;
      uint32_t min_x = x, max_x = x, min_y = y, max_y = y;
      seen[idx] = 1;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        ++blob.area;
        min_x = std::min(min_x, cx);
        max_x = std::max(max_x, cx);
        min_y = std::min(min_y, cy);
        max_y = std::max(max_y, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int64_t nx = static_cast<int64_t>(cx) + dx;
            int64_t ny = static_cast<int64_t>(cy) + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            size_t nidx = static_cast<size_t>(ny) * w + nx;
            if (mask.data[nidx] == 0 || seen[nidx]) continue;
            seen[nidx] = 1;
            queue.emplace_back(static_cast<uint32_t>(nx), static_cast<uint32_t>(ny));
          }
        }
      }
      blob.bbox = Rect{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
      blobs.push_back(blob);
    }
  }

  std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
    return a.bbox.x < b.bbox.x;
  });
  return blobs;
}

const Blob* gating_blob(std::span<const Blob> blobs, uint64_t frame_area,
                        const BlobGateConfig& cfg) {
  if (!(cfg.min_blob_ratio > 0.0) || !(cfg.min_blob_ratio < 1.0)) {
    throw InvariantViolation("blob ratio must lie in (0,1)");
  }
  const Blob* best = nullptr;
  for (const Blob& b : blobs) {
    if (!best || b.area > best->area) best = &b;
  }
  if (!best) return nullptr;
  double threshold = cfg.min_blob_ratio * static_cast<double>(frame_area);
  if (static_cast<double>(best->area) > threshold) return best;
  return nullptr;
}

bool foreground_gate(std::span<const Blob> blobs, uint64_t frame_area,
                     const BlobGateConfig& cfg) {
  return gating_blob(blobs, frame_area, cfg) != nullptr;
}

}  // namespace vigil::bgsub
