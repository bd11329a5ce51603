#include "vigil/integral.hpp"

#include "vigil/errors.hpp"

namespace vigil::detect {

IntegralImage integral_image(const Frame& gray) {
  if (gray.channels != 1) throw InvariantViolation("integral_image expects grayscale");
  validate_frame(gray);

  IntegralImage out;
  out.width = gray.width;
  out.height = gray.height;
  const size_t stride = out.width + 1;
  out.sum.assign(stride * (out.height + 1), 0);
  out.sq_sum.assign(stride * (out.height + 1), 0);

  for (uint32_t y = 0; y < gray.height; ++y) {
    int64_t row = 0;
    int64_t sq_row = 0;
    const uint8_t* src = gray.pixels.data() + static_cast<size_t>(y) * gray.width;
    int64_t* dst = out.sum.data() + (y + 1) * stride;
    int64_t* sq_dst = out.sq_sum.data() + (y + 1) * stride;
    const int64_t* prev = out.sum.data() + static_cast<size_t>(y) * stride;
    const int64_t* sq_prev = out.sq_sum.data() + static_cast<size_t>(y) * stride;
    for (uint32_t x = 0; x < gray.width; ++x) {
      int64_t v = src[x];
      row += v;
      sq_row += v * v;
      dst[x + 1] = prev[x + 1] + row;
      sq_dst[x + 1] = sq_prev[x + 1] + sq_row;
    }
  }
  return out;
}

}  // namespace vigil::detect
