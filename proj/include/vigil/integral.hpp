#pragma once

#include <cstdint>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::detect {

// Summed-area table with one extra zero row/column, so any rectangle sum is
// four lookups with no edge cases. Values are int64: 255 * 2^32 pixels still
// fits with room to spare, and the squared table needs the headroom.
struct IntegralImage {
  uint32_t width = 0;   // source image width
  uint32_t height = 0;  // source image height
  std::vector<int64_t> sum;     // (width+1) * (height+1)
  std::vector<int64_t> sq_sum;  // same shape, of squared pixels

  int64_t at(uint32_t x, uint32_t y) const {
    return sum[static_cast<size_t>(y) * (width + 1) + x];
  }
  int64_t sq_at(uint32_t x, uint32_t y) const {
    return sq_sum[static_cast<size_t>(y) * (width + 1) + x];
  }

  // Sum over the half-open box [x, x+w) x [y, y+h).
  int64_t rect_sum(uint32_t x, uint32_t y, uint32_t w, uint32_t h) const {
    const size_t stride = width + 1;
    return sum[(y + h) * stride + (x + w)] - sum[(y + h) * stride + x] -
           sum[static_cast<size_t>(y) * stride + (x + w)] + sum[static_cast<size_t>(y) * stride + x];
  }
  int64_t rect_sq_sum(uint32_t x, uint32_t y, uint32_t w, uint32_t h) const {
    const size_t stride = width + 1;
    return sq_sum[(y + h) * stride + (x + w)] - sq_sum[(y + h) * stride + x] -
           sq_sum[static_cast<size_t>(y) * stride + (x + w)] +
           sq_sum[static_cast<size_t>(y) * stride + x];
  }
};

// Builds both tables in one pass over a grayscale frame.
IntegralImage integral_image(const Frame& gray);

}  // namespace vigil::detect
