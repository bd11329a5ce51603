#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vigil/model.hpp"
#include "vigil/rng.hpp"

namespace testutil {

// Self-deleting scratch directory for tests that touch the filesystem.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto candidate = base / (tag + "_" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("could not create temp dir for " + tag);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline vigil::Frame make_frame(const std::string& stream_id, uint64_t seq, uint32_t w, uint32_t h,
                               uint8_t channels = 1, uint8_t fill = 0) {
  vigil::Frame f;
  f.stream_id = stream_id;
  f.sequence_nr = seq;
  f.timestamp_ms = static_cast<int64_t>(seq) * 40;
  f.width = w;
  f.height = h;
  f.channels = channels;
  f.pixels.assign(static_cast<size_t>(w) * h * channels, fill);
  return f;
}

// Uniform random frame with random features, for round-trip properties.
inline vigil::Frame random_frame(vigil::SplitMix64& rng) {
  uint32_t w = 1 + static_cast<uint32_t>(rng.below(24));
  uint32_t h = 1 + static_cast<uint32_t>(rng.below(24));
  uint8_t channels = rng.below(2) == 0 ? 1 : 3;
  vigil::Frame f = make_frame("s" + std::to_string(rng.below(1000)), rng.next() % 100000, w, h,
                              channels);
  f.timestamp_ms = static_cast<int64_t>(rng.next() % 1000000);
  for (auto& p : f.pixels) p = static_cast<uint8_t>(rng.below(256));
  uint64_t feature_count = rng.below(3);
  for (uint64_t i = 0; i < feature_count; ++i) {
    vigil::Feature feat;
    feat.name = "feat" + std::to_string(i);
    uint64_t descriptor_count = rng.below(3);
    for (uint64_t j = 0; j < descriptor_count; ++j) {
      vigil::Descriptor d;
      d.bbox.x = static_cast<uint32_t>(rng.below(w));
      d.bbox.y = static_cast<uint32_t>(rng.below(h));
      d.bbox.w = 1 + static_cast<uint32_t>(rng.below(w - d.bbox.x));
      d.bbox.h = 1 + static_cast<uint32_t>(rng.below(h - d.bbox.y));
      d.label = "label" + std::to_string(j);
      d.confidence = static_cast<double>(rng.below(1001)) / 1000.0;
      feat.descriptors.push_back(d);
    }
    f.features.push_back(feat);
  }
  return f;
}

// Fill a square region of a grayscale frame.
inline void paint_square(vigil::Frame& f, uint32_t x0, uint32_t y0, uint32_t side, uint8_t value) {
  for (uint32_t y = y0; y < y0 + side && y < f.height; ++y)
    for (uint32_t x = x0; x < x0 + side && x < f.width; ++x)
      for (uint8_t c = 0; c < f.channels; ++c) f.at(x, y, c) = value;
}

}  // namespace testutil
