#include "vigil/hog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "token_reader.hpp"
#include "vigil/bgsub.hpp"
#include "vigil/errors.hpp"

namespace vigil::detect {

namespace {

// Per-pixel gradient magnitude and fractional bin position. pos lies in
// [-0.5, 8.5): the integer neighbors of pos are the two bin indices the
// magnitude splits between (modulo 9, so orientation wraps at 180 degrees).
struct GradientField {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<double> mag;
  std::vector<double> pos;
};

GradientField compute_gradients(const Frame& gray) {
  GradientField g;
  g.width = gray.width;
  g.height = gray.height;
  g.mag.resize(gray.pixels.size());
  g.pos.resize(gray.pixels.size());
  const uint32_t w = gray.width;
  const uint32_t h = gray.height;
  const uint8_t* px = gray.pixels.data();
  for (uint32_t y = 0; y < h; ++y) {
    const uint8_t* row = px + static_cast<size_t>(y) * w;
    const uint8_t* row_up = px + static_cast<size_t>(y == 0 ? 0 : y - 1) * w;
    const uint8_t* row_dn = px + static_cast<size_t>(y + 1 >= h ? h - 1 : y + 1) * w;
    for (uint32_t x = 0; x < w; ++x) {
      int gx = static_cast<int>(row[x + 1 >= w ? w - 1 : x + 1]) -
               static_cast<int>(row[x == 0 ? 0 : x - 1]);
      int gy = static_cast<int>(row_dn[x]) - static_cast<int>(row_up[x]);
      size_t i = static_cast<size_t>(y) * w + x;
      g.mag[i] = std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
      double deg = std::atan2(static_cast<double>(gy), static_cast<double>(gx)) *
                   (180.0 / std::numbers::pi);
      if (deg < 0.0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      g.pos[i] = deg / 20.0 - 0.5;
    }
  }
  return g;
}

// 9-bin histogram of one 8x8 cell whose top-left pixel is (px, py).
void cell_histogram(const GradientField& g, uint32_t px, uint32_t py, double* hist) {
  std::fill(hist, hist + kHogBins, 0.0);
  for (uint32_t dy = 0; dy < kHogCellSize; ++dy) {
    const size_t row = static_cast<size_t>(py + dy) * g.width + px;
    for (uint32_t dx = 0; dx < kHogCellSize; ++dx) {
      double m = g.mag[row + dx];
      if (m == 0.0) continue;
      double pos = g.pos[row + dx];
      double b0 = std::floor(pos);
      double frac = pos - b0;
      int i0 = (static_cast<int>(b0) % 9 + 9) % 9;
      int i1 = (i0 + 1) % 9;
      hist[i0] += (1.0 - frac) * m;
      hist[i1] += frac * m;
    }
  }
}

void l2hys(double* v, size_t n) {
  constexpr double kEps = 1e-6;
  constexpr double kClip = 0.2;
  double sum_sq = 0.0;
  for (size_t i = 0; i < n; ++i) sum_sq += v[i] * v[i];
  double norm = std::sqrt(sum_sq + kEps * kEps);
  for (size_t i = 0; i < n; ++i) v[i] /= norm;
  sum_sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    v[i] = std::min(v[i], kClip);
    sum_sq += v[i] * v[i];
  }
  norm = std::sqrt(sum_sq + kEps * kEps);
  for (size_t i = 0; i < n; ++i) v[i] /= norm;
}

// Blocks row-major over the window; within a block the four cells row-major.
// `cells` is a flat grid of 9-double histograms with the given row stride,
// (cell_x0, cell_y0) the window's top-left cell.
void assemble_descriptor(const double* cells, uint32_t cells_stride, uint32_t cell_x0,
                         uint32_t cell_y0, std::vector<double>& out) {
  out.resize(kHogDescriptorSize);
  double* dst = out.data();
  for (uint32_t by = 0; by < kHogBlocksY; ++by) {
    for (uint32_t bx = 0; bx < kHogBlocksX; ++bx) {
      double* block = dst;
      for (uint32_t cy = 0; cy < 2; ++cy) {
        for (uint32_t cx = 0; cx < 2; ++cx) {
          const double* src =
              cells + (static_cast<size_t>(cell_y0 + by + cy) * cells_stride + cell_x0 + bx + cx) *
                          kHogBins;
          std::copy(src, src + kHogBins, dst);
          dst += kHogBins;
        }
      }
      l2hys(block, 4 * kHogBins);
    }
  }
}

void validate_hog_model(const HogModel& model) {
  if (model.svm_weights.size() != kHogDescriptorSize) {
    throw InvariantViolation("SVM weight vector must have 3780 entries");
  }
}

}  // namespace

HogModel parse_hog_model(std::istream& in) {
  TokenReader tokens(in);
  std::string magic = tokens.next("HOG1 magic");
  if (magic != "HOG1") throw BadModelFile("model file must start with HOG1");

  HogModel model;
  model.svm_bias = tokens.real("SVM bias");
  model.hit_threshold = tokens.real("hit threshold");
  model.svm_weights.reserve(kHogDescriptorSize);
  for (uint32_t i = 0; i < kHogDescriptorSize; ++i) {
    model.svm_weights.push_back(tokens.real("SVM weight"));
  }
  std::string trailing;
  if (tokens.try_next(trailing)) {
    throw BadModelFile("trailing content after SVM weights: '" + trailing + "'");
  }
  return model;
}

HogModel load_hog_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadModelFile("cannot open model file: " + path);
  return parse_hog_model(in);
}

void write_hog_model(std::ostream& out, const HogModel& model) {
  validate_hog_model(model);
  out.precision(17);
  out << "HOG1 " << model.svm_bias << ' ' << model.hit_threshold << '\n';
  for (uint32_t i = 0; i < kHogDescriptorSize; ++i) {
    out << model.svm_weights[i] << (i % 6 == 5 ? '\n' : ' ');
  }
  if (kHogDescriptorSize % 6 != 0) out << '\n';
}

std::vector<double> hog_descriptor(const Frame& gray_window) {
  if (gray_window.channels != 1 || gray_window.width != kHogWindowWidth ||
      gray_window.height != kHogWindowHeight) {
    throw BadWindowSize("descriptor window must be 64x128 grayscale");
  }
  validate_frame(gray_window);

  GradientField g = compute_gradients(gray_window);
  constexpr uint32_t cells_x = kHogWindowWidth / kHogCellSize;    // 8
  constexpr uint32_t cells_y = kHogWindowHeight / kHogCellSize;   // 16
  std::vector<double> cells(static_cast<size_t>(cells_x) * cells_y * kHogBins);
  for (uint32_t cy = 0; cy < cells_y; ++cy) {
    for (uint32_t cx = 0; cx < cells_x; ++cx) {
      cell_histogram(g, cx * kHogCellSize, cy * kHogCellSize,
                     cells.data() + (static_cast<size_t>(cy) * cells_x + cx) * kHogBins);
    }
  }
  std::vector<double> descriptor;
  assemble_descriptor(cells.data(), cells_x, 0, 0, descriptor);
  return descriptor;
}

Frame resize_bilinear(const Frame& frame, uint32_t new_width, uint32_t new_height) {
  validate_frame(frame);
  if (new_width == 0 || new_height == 0) {
    throw InvariantViolation("resize target must be nonzero");
  }

  Frame out;
  out.stream_id = frame.stream_id;
  out.sequence_nr = frame.sequence_nr;
  out.timestamp_ms = frame.timestamp_ms;
  out.width = new_width;
  out.height = new_height;
  out.channels = frame.channels;
  out.pixels.resize(static_cast<size_t>(new_width) * new_height * frame.channels);

  const double sx_ratio = static_cast<double>(frame.width) / new_width;
  const double sy_ratio = static_cast<double>(frame.height) / new_height;
  const uint32_t c = frame.channels;
  for (uint32_t y = 0; y < new_height; ++y) {
    double sy = std::clamp((y + 0.5) * sy_ratio - 0.5, 0.0, frame.height - 1.0);
    uint32_t y0 = static_cast<uint32_t>(sy);
    uint32_t y1 = std::min(y0 + 1, frame.height - 1);
    double fy = sy - y0;
    for (uint32_t x = 0; x < new_width; ++x) {
      double sx = std::clamp((x + 0.5) * sx_ratio - 0.5, 0.0, frame.width - 1.0);
      uint32_t x0 = static_cast<uint32_t>(sx);
      uint32_t x1 = std::min(x0 + 1, frame.width - 1);
      double fx = sx - x0;
      for (uint32_t ch = 0; ch < c; ++ch) {
        double top = (1.0 - fx) * frame.at(x0, y0, ch) + fx * frame.at(x1, y0, ch);
        double bottom = (1.0 - fx) * frame.at(x0, y1, ch) + fx * frame.at(x1, y1, ch);
        double v = (1.0 - fy) * top + fy * bottom;
        out.pixels[(static_cast<size_t>(y) * new_width + x) * c + ch] =
            static_cast<uint8_t>(std::clamp<long>(std::llround(v), 0, 255));
      }
    }
  }
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<Descriptor> detect_multiscale_hog(const Frame& frame, const HogModel& model,
                                              const ScanParams& params) {
  validate_hog_model(model);
  validate_scan_params(params);

  Frame gray = bgsub::to_grayscale(frame);
  const uint32_t image_w = gray.width;
  const uint32_t image_h = gray.height;

  std::vector<ScoredBox> raws;
  std::vector<double> descriptor;
  std::vector<double> window_cells(8 * 16 * kHogBins);

  for (int k = 0;; ++k) {
    double scale = std::pow(params.scale_factor, k);
    uint32_t dw = static_cast<uint32_t>(image_w / scale);
    uint32_t dh = static_cast<uint32_t>(image_h / scale);
    if (dw < kHogWindowWidth || dh < kHogWindowHeight) break;

    const double ratio_x = static_cast<double>(image_w) / dw;
    const double ratio_y = static_cast<double>(image_h) / dh;
    const uint32_t mapped_w = static_cast<uint32_t>(std::llround(kHogWindowWidth * ratio_x));
    const uint32_t mapped_h = static_cast<uint32_t>(std::llround(kHogWindowHeight * ratio_y));
    if (params.max_width != 0 && mapped_w > params.max_width) break;
    if (params.max_height != 0 && mapped_h > params.max_height) break;
    if (mapped_w < params.min_width || mapped_h < params.min_height) continue;

    Frame scaled = k == 0 ? gray : resize_bilinear(gray, dw, dh);
    GradientField grads = compute_gradients(scaled);

    // Window positions that land on the cell grid reuse one histogram pass
    // over the whole level; other strides rebuild cells per window.
    const bool aligned = params.window_stride % kHogCellSize == 0;
    uint32_t grid_x = dw / kHogCellSize;
    uint32_t grid_y = dh / kHogCellSize;
    std::vector<double> grid_cells;
    if (aligned) {
      grid_cells.resize(static_cast<size_t>(grid_x) * grid_y * kHogBins);
      for (uint32_t cy = 0; cy < grid_y; ++cy) {
        for (uint32_t cx = 0; cx < grid_x; ++cx) {
          cell_histogram(grads, cx * kHogCellSize, cy * kHogCellSize,
                         grid_cells.data() + (static_cast<size_t>(cy) * grid_x + cx) * kHogBins);
        }
      }
    }

    for (uint32_t y = 0; y + kHogWindowHeight <= dh; y += params.window_stride) {
      for (uint32_t x = 0; x + kHogWindowWidth <= dw; x += params.window_stride) {
        if (aligned) {
          assemble_descriptor(grid_cells.data(), grid_x, x / kHogCellSize, y / kHogCellSize,
                              descriptor);
        } else {
          for (uint32_t cy = 0; cy < 16; ++cy) {
            for (uint32_t cx = 0; cx < 8; ++cx) {
              cell_histogram(grads, x + cx * kHogCellSize, y + cy * kHogCellSize,
                             window_cells.data() + (static_cast<size_t>(cy) * 8 + cx) * kHogBins);
            }
          }
          assemble_descriptor(window_cells.data(), 8, 0, 0, descriptor);
        }

        double score = model.svm_bias;
        for (uint32_t i = 0; i < kHogDescriptorSize; ++i) {
          score += model.svm_weights[i] * descriptor[i];
        }
        if (score > model.hit_threshold) {
          uint32_t ox = static_cast<uint32_t>(std::llround(x * ratio_x));
          uint32_t oy = static_cast<uint32_t>(std::llround(y * ratio_y));
          uint32_t ow = std::min(mapped_w, image_w - std::min(ox, image_w - 1));
          uint32_t oh = std::min(mapped_h, image_h - std::min(oy, image_h - 1));
          raws.push_back({Rect{ox, oy, ow, oh}, score});
        }
      }
    }
  }

  if (raws.empty()) return {};

  NmsResult merged = nms_indices(raws, params.nms_iou_threshold);
  std::vector<Descriptor> out;
  out.reserve(merged.kept.size());
  for (size_t i : merged.kept) {
    out.push_back(Descriptor{raws[i].bbox, "person", logistic(raws[i].score)});
  }
  return out;
}

}  // namespace vigil::detect
