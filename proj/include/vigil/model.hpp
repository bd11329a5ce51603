#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

struct Rect {
  uint32_t x = 0;
  uint32_t y = 0;
  uint32_t w = 0;
  uint32_t h = 0;

  bool operator==(const Rect&) const = default;
  uint64_t area() const { return static_cast<uint64_t>(w) * h; }
};

// A named detection attached to a frame: bounding box, label, confidence.
struct Descriptor {
  Rect bbox;
  std::string label;
  double confidence = 0.0;

  bool operator==(const Descriptor&) const = default;
};

struct Feature {
  std::string name;
  std::vector<Descriptor> descriptors;

  bool operator==(const Feature&) const = default;
};

// One image flowing through the topology. Pixels are row-major, 1 channel
// (grayscale) or 3 channels (RGB interleaved).
struct Frame {
  std::string stream_id;
  uint64_t sequence_nr = 0;
  int64_t timestamp_ms = 0;
  uint32_t width = 0;
  uint32_t height = 0;
  uint8_t channels = 1;
  std::vector<uint8_t> pixels;
  std::vector<Feature> features;

  bool operator==(const Frame&) const = default;

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  uint8_t at(uint32_t x, uint32_t y, uint32_t c = 0) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t& at(uint32_t x, uint32_t y, uint32_t c = 0) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

// Throws InvariantViolation if the frame (or any attached descriptor)
// breaks a structural invariant.
void validate_frame(const Frame& frame);

// Canonical byte layout ("FRM1", little-endian). Deterministic: equal
// frames always produce identical bytes.
std::vector<uint8_t> encode_frame(const Frame& frame);

// Strict inverse of encode_frame. Rejects unknown magic, short input,
// trailing bytes, and invariant-breaking content.
Frame decode_frame(std::span<const uint8_t> bytes);

// Decodes one record from the front of a longer buffer (chunk bodies hold
// several back to back) and reports how many bytes it spanned.
Frame decode_frame_prefix(std::span<const uint8_t> bytes, size_t& consumed);

// Structural check of an encoded frame without materializing the pixels.
// Used by the runtime to vet payloads before they reach a bolt.
bool frame_bytes_valid(std::span<const uint8_t> bytes);

// Reads just the stream id from an encoded frame (it sits right after the
// magic). Cheap enough for routing.
std::optional<std::string> frame_bytes_stream_id(std::span<const uint8_t> bytes);

std::optional<uint64_t> frame_bytes_sequence_nr(std::span<const uint8_t> bytes);

}  // namespace vigil
