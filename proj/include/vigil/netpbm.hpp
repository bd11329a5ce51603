#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::netpbm {

// Binary netpbm support, restricted to what the pipeline produces and
// consumes: P5 (grayscale) and P6 (RGB), maxval 255.
//
// The writer emits one comment line `# ts=<milliseconds>` so a frame's
// timestamp survives a trip through the filesystem; readers that do not
// care (including any standards-conforming netpbm tool) skip it.

struct Image {
  uint32_t width = 0;
  uint32_t height = 0;
  uint8_t channels = 1;  // 1 for P5, 3 for P6
  std::vector<uint8_t> pixels;
  std::optional<int64_t> timestamp_ms;  // parsed from a "# ts=" comment if present
};

// Throws DecodeError on malformed input (wrong magic, maxval != 255,
// short raster, overflow-sized headers).
Image read(std::istream& in);
Image read_file(const std::filesystem::path& path);

std::vector<uint8_t> write_ppm(const Image& img);
std::vector<uint8_t> write_pgm(const Image& img);

// Frame <-> image adapters. write_frame_ppm always produces P6; grayscale
// frames are expanded to RGB.
std::vector<uint8_t> write_frame_ppm(const Frame& frame);
Frame to_frame(const Image& img, const std::string& stream_id, uint64_t sequence_nr);

}  // namespace vigil::netpbm
