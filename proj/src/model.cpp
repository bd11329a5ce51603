#include "vigil/model.hpp"

#include "vigil/wire.hpp"

namespace vigil {

namespace {
constexpr char kMagic[5] = "FRM1";

void validate_descriptor(const Descriptor& d, uint32_t width, uint32_t height) {
  if (d.bbox.w < 1 || d.bbox.h < 1)
    throw InvariantViolation("descriptor bbox must be at least 1x1");
  if (d.bbox.x + static_cast<uint64_t>(d.bbox.w) > width ||
      d.bbox.y + static_cast<uint64_t>(d.bbox.h) > height)
    throw InvariantViolation("descriptor bbox outside frame");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
    throw InvariantViolation("descriptor confidence outside [0,1]");
}
}  // namespace

void validate_frame(const Frame& frame) {
  if (frame.width == 0 || frame.height == 0)
    throw InvariantViolation("frame dimensions must be positive");
  if (frame.channels != 1 && frame.channels != 3)
    throw InvariantViolation("channels must be 1 or 3");
  uint64_t expected =
      static_cast<uint64_t>(frame.width) * frame.height * frame.channels;
  if (frame.pixels.size() != expected)
    throw InvariantViolation("pixel buffer length does not match dimensions");
  for (const auto& f : frame.features) {
    if (f.name.empty()) throw InvariantViolation("feature name must be nonempty");
    for (const auto& d : f.descriptors) validate_descriptor(d, frame.width, frame.height);
  }
}

std::vector<uint8_t> encode_frame(const Frame& frame) {
  validate_frame(frame);
  wire::Writer w;
  w.magic(kMagic);
  w.str16(frame.stream_id);
  w.u64(frame.sequence_nr);
  w.i64(frame.timestamp_ms);
  w.u32(frame.width);
  w.u32(frame.height);
  w.u8(frame.channels);
  w.raw(frame.pixels);
  if (frame.features.size() > UINT16_MAX)
    throw InvariantViolation("too many features");
  w.u16(static_cast<uint16_t>(frame.features.size()));
  for (const auto& f : frame.features) {
    w.str16(f.name);
    if (f.descriptors.size() > UINT16_MAX)
      throw InvariantViolation("too many descriptors");
    w.u16(static_cast<uint16_t>(f.descriptors.size()));
    for (const auto& d : f.descriptors) {
      w.u32(d.bbox.x);
      w.u32(d.bbox.y);
      w.u32(d.bbox.w);
      w.u32(d.bbox.h);
      w.str16(d.label);
      w.f64(d.confidence);
    }
  }
  return w.take();
}

namespace {
Frame decode_frame_record(wire::Reader& r) {
  r.expect_magic(kMagic);

  Frame frame;
  frame.stream_id = r.str16();
  frame.sequence_nr = r.u64();
  frame.timestamp_ms = r.i64();
  frame.width = r.u32();
  frame.height = r.u32();
  frame.channels = r.u8();
  if (frame.width == 0 || frame.height == 0)
    throw InvariantViolation("frame dimensions must be positive");
  if (frame.channels != 1 && frame.channels != 3)
    throw InvariantViolation("channels must be 1 or 3");

  uint64_t pixel_bytes =
      static_cast<uint64_t>(frame.width) * frame.height * frame.channels;
  if (pixel_bytes > r.remaining()) throw Truncated("pixel data cut short");
  auto raw = r.raw(static_cast<size_t>(pixel_bytes));
  frame.pixels.assign(raw.begin(), raw.end());

  uint16_t feature_count = r.u16();
  frame.features.reserve(feature_count);
  for (uint16_t i = 0; i < feature_count; ++i) {
    Feature f;
    f.name = r.str16();
    uint16_t descriptor_count = r.u16();
    f.descriptors.reserve(descriptor_count);
    for (uint16_t j = 0; j < descriptor_count; ++j) {
      Descriptor d;
      d.bbox.x = r.u32();
      d.bbox.y = r.u32();
      d.bbox.w = r.u32();
      d.bbox.h = r.u32();
      d.label = r.str16();
      d.confidence = r.f64();
      f.descriptors.push_back(std::move(d));
    }
    frame.features.push_back(std::move(f));
  }

  validate_frame(frame);
  return frame;
}
}  // namespace

Frame decode_frame(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw Truncated("empty input");
  wire::Reader r(bytes);
  Frame frame = decode_frame_record(r);
  if (r.remaining() != 0) throw TrailingBytes("trailing bytes after frame record");
  return frame;
}

Frame decode_frame_prefix(std::span<const uint8_t> bytes, size_t& consumed) {
  if (bytes.empty()) throw Truncated("empty input");
  wire::Reader r(bytes);
  Frame frame = decode_frame_record(r);
  consumed = r.position();
  return frame;
}

bool frame_bytes_valid(std::span<const uint8_t> bytes) {
  // Same walk as decode_frame but without copying the raster.
  try {
    if (bytes.empty()) return false;
    wire::Reader r(bytes);
    r.expect_magic(kMagic);
    r.str16();
    r.u64();
    r.i64();
    uint32_t width = r.u32();
    uint32_t height = r.u32();
    uint8_t channels = r.u8();
    if (width == 0 || height == 0) return false;
    if (channels != 1 && channels != 3) return false;
    uint64_t pixel_bytes = static_cast<uint64_t>(width) * height * channels;
    if (pixel_bytes > r.remaining()) return false;
    r.raw(static_cast<size_t>(pixel_bytes));
    uint16_t feature_count = r.u16();
    for (uint16_t i = 0; i < feature_count; ++i) {
      std::string name = r.str16();
      if (name.empty()) return false;
      uint16_t descriptor_count = r.u16();
      for (uint16_t j = 0; j < descriptor_count; ++j) {
        uint32_t x = r.u32(), y = r.u32(), w = r.u32(), h = r.u32();
        r.str16();
        double conf = r.f64();
        if (w < 1 || h < 1) return false;
        if (x + static_cast<uint64_t>(w) > width || y + static_cast<uint64_t>(h) > height)
          return false;
        if (!(conf >= 0.0 && conf <= 1.0)) return false;
      }
    }
    return r.remaining() == 0;
  } catch (const Error&) {
    return false;
  }
}

std::optional<std::string> frame_bytes_stream_id(std::span<const uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    r.expect_magic(kMagic);
    return r.str16();
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<uint64_t> frame_bytes_sequence_nr(std::span<const uint8_t> bytes) {
  try {
    wire::Reader r(bytes);
    r.expect_magic(kMagic);
    r.str16();
    return r.u64();
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace vigil
