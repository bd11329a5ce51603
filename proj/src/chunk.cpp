#include "vigil/chunk.hpp"

#include <zlib.h>

#include <fstream>

#include "vigil/errors.hpp"
#include "vigil/wire.hpp"

namespace vigil::sink {

namespace {
constexpr char kMagic[5] = "FVC1";

uint32_t body_crc(std::span<const uint8_t> body) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, body.data(), static_cast<uInt>(body.size()));
  return static_cast<uint32_t>(crc);
}
}  // namespace

std::vector<uint8_t> pack_chunk(std::span<const Frame> frames, double fps) {
  if (frames.empty()) throw InvariantViolation("a chunk needs at least one frame");
  if (!(fps > 0.0)) throw InvariantViolation("fps must be positive");

  const Frame& first = frames.front();
  for (size_t i = 0; i < frames.size(); ++i) {
    validate_frame(frames[i]);
    if (frames[i].width != first.width || frames[i].height != first.height ||
        frames[i].channels != first.channels) {
      throw InvariantViolation("all frames in a chunk must share dimensions");
    }
    if (i > 0 && frames[i].sequence_nr <= frames[i - 1].sequence_nr) {
      throw InvariantViolation("chunk frames must be in ascending sequence order");
    }
  }

  std::vector<uint8_t> body;
  for (const Frame& frame : frames) {
    std::vector<uint8_t> record = encode_frame(frame);
    body.insert(body.end(), record.begin(), record.end());
  }

  wire::Writer w;
  w.magic(kMagic);
  w.u32(static_cast<uint32_t>(frames.size()));
  w.f64(fps);
  w.u32(first.width);
  w.u32(first.height);
  w.u8(first.channels);
  w.raw(body);
  w.u32(body_crc(body));
  return w.take();
}

Chunk read_chunk(std::span<const uint8_t> bytes) {
  if (bytes.empty()) throw Truncated("empty input");
  wire::Reader r(bytes);
  r.expect_magic(kMagic);

  uint32_t frame_count = r.u32();
  if (frame_count == 0) throw InvariantViolation("a chunk needs at least one frame");

  Chunk chunk;
  chunk.fps = r.f64();
  if (!(chunk.fps > 0.0)) throw InvariantViolation("fps must be positive");
  uint32_t width = r.u32();
  uint32_t height = r.u32();
  uint8_t channels = r.u8();

  const size_t body_start = r.position();
  if (r.remaining() < 4) throw Truncated("missing CRC footer");
  std::span<const uint8_t> rest = bytes.subspan(body_start, bytes.size() - body_start - 4);

  size_t offset = 0;
  chunk.frames.reserve(frame_count);
  for (uint32_t i = 0; i < frame_count; ++i) {
    size_t consumed = 0;
    Frame frame = decode_frame_prefix(rest.subspan(offset), consumed);
    if (frame.width != width || frame.height != height || frame.channels != channels) {
      throw InvariantViolation("chunk frame does not match header dimensions");
    }
    if (i > 0 && frame.sequence_nr <= chunk.frames.back().sequence_nr) {
      throw InvariantViolation("chunk frames must be in ascending sequence order");
    }
    offset += consumed;
    chunk.frames.push_back(std::move(frame));
  }
  if (offset != rest.size()) throw TrailingBytes("trailing bytes inside chunk body");

  uint32_t stored = static_cast<uint32_t>(bytes[bytes.size() - 4]) |
                    static_cast<uint32_t>(bytes[bytes.size() - 3]) << 8 |
                    static_cast<uint32_t>(bytes[bytes.size() - 2]) << 16 |
                    static_cast<uint32_t>(bytes[bytes.size() - 1]) << 24;
  if (stored != body_crc(rest)) throw CrcMismatch("chunk body CRC32 does not match footer");
  return chunk;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

Chunk read_chunk_file(const std::string& path) { return read_chunk(read_file_bytes(path)); }

}  // namespace vigil::sink
