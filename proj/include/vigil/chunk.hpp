#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vigil/model.hpp"

namespace vigil::sink {

// A packed batch of frames: "FVC1" header (frame count, fps, shared dims),
// the frames as back-to-back FRM1 records in sequence order, and a CRC32 of
// that body. Bit-exact by construction; no codec involved.
struct Chunk {
  double fps = 0.0;
  std::vector<Frame> frames;
};

std::vector<uint8_t> pack_chunk(std::span<const Frame> frames, double fps);

// Strict inverse: verifies magic, CRC, frame ordering, shared dimensions,
// and that nothing trails the footer.
Chunk read_chunk(std::span<const uint8_t> bytes);

std::vector<uint8_t> read_file_bytes(const std::string& path);
Chunk read_chunk_file(const std::string& path);

}  // namespace vigil::sink
