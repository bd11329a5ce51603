#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::bgsub {

// Per-stream exponential moving-average background. The first frame seeds
// the accumulator directly; every later frame folds in with learning rate
// alpha, so the model tracks slow scene changes without ground truth.
struct BackgroundModel {
  uint32_t width = 0;
  uint32_t height = 0;
  double alpha = 0.05;
  bool initialized = false;
  std::vector<double> accumulator;  // one value per pixel, range [0,255]

  explicit BackgroundModel(double learning_rate = 0.05);
};

struct BlobGateConfig {
  int diff_threshold = 25;          // [1,255]
  double min_blob_ratio = 0.10;     // (0,1); gate is strict: area must exceed this share
};

struct Blob {
  uint64_t area = 0;
  Rect bbox;

  bool operator==(const Blob&) const = default;
};

struct BinaryMask {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> data;  // 0 or 255

  uint8_t at(uint32_t x, uint32_t y) const { return data[static_cast<size_t>(y) * width + x]; }
};

// gray = round(0.299 R + 0.587 G + 0.114 B); identity on grayscale input.
Frame to_grayscale(const Frame& frame);

// acc := gray on first use, otherwise acc := (1-alpha)*acc + alpha*gray.
// Throws DimsMismatch when the frame does not match the model dimensions.
void accumulate_weighted(BackgroundModel& model, const Frame& gray);

// mask(x,y) = 255 iff |round(acc) - gray| > diff_threshold.
// Throws Uninitialized before the model has seen a frame.
BinaryMask abs_diff_threshold(const BackgroundModel& model, const Frame& gray,
                              const BlobGateConfig& cfg);

// 8-connected components of the 255-pixels, ordered by (bbox.y, bbox.x).
std::vector<Blob> connected_components(const BinaryMask& mask);

// The blob that opens the gate: largest area, if it strictly exceeds
// min_blob_ratio * frame_area. Null otherwise.
const Blob* gating_blob(std::span<const Blob> blobs, uint64_t frame_area,
                        const BlobGateConfig& cfg);

bool foreground_gate(std::span<const Blob> blobs, uint64_t frame_area,
                     const BlobGateConfig& cfg);

}  // namespace vigil::bgsub
