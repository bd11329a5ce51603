#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vigil/haar.hpp"
#include "vigil/model.hpp"

namespace vigil::detect {

// Window geometry is fixed: 64x128 pixels, 8x8 cells, 2x2-cell blocks at
// 8-pixel stride, 9 unsigned orientation bins. That yields 7x15 blocks of 36
// values each, hence the 3780-weight linear SVM.
inline constexpr uint32_t kHogWindowWidth = 64;
inline constexpr uint32_t kHogWindowHeight = 128;
inline constexpr uint32_t kHogCellSize = 8;
inline constexpr uint32_t kHogBins = 9;
inline constexpr uint32_t kHogBlocksX = 7;
inline constexpr uint32_t kHogBlocksY = 15;
inline constexpr uint32_t kHogDescriptorSize = kHogBlocksX * kHogBlocksY * 4 * kHogBins;  // 3780

struct HogModel {
  double svm_bias = 0.0;
  double hit_threshold = 0.0;
  std::vector<double> svm_weights;  // exactly kHogDescriptorSize entries
};

// Text model format, '#' comment lines ignored:
//   HOG1 bias hitThreshold
//   3780 whitespace-separated reals
HogModel parse_hog_model(std::istream& in);
HogModel load_hog_model(const std::string& path);
void write_hog_model(std::ostream& out, const HogModel& model);

// Descriptor of one 64x128 grayscale window. Centered [-1,0,1] gradients with
// replicated borders, magnitude split linearly between the two nearest bin
// centers, per-block L2-Hys normalization, blocks concatenated row-major.
// Throws BadWindowSize unless the frame is exactly 64x128 single-channel.
std::vector<double> hog_descriptor(const Frame& gray_window);

// Downscale by pixel-center bilinear sampling.
Frame resize_bilinear(const Frame& frame, uint32_t new_width, uint32_t new_height);

double logistic(double x);

// Pyramid scan: the image shrinks by scale_factor per level while the window
// stays 64x128, windows scoring strictly above hitThreshold survive NMS and
// map back to original coordinates; confidence is the logistic of the score.
std::vector<Descriptor> detect_multiscale_hog(const Frame& frame, const HogModel& model,
                                              const ScanParams& params);

}  // namespace vigil::detect
