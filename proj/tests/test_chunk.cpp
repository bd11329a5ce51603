#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "vigil/chunk.hpp"
#include "vigil/errors.hpp"
#include "vigil/rng.hpp"

using namespace vigil;
using namespace vigil::sink;

namespace {

std::vector<Frame> random_batch(SplitMix64& rng) {
  uint32_t w = 2 + static_cast<uint32_t>(rng.below(14));
  uint32_t h = 2 + static_cast<uint32_t>(rng.below(14));
  uint8_t channels = rng.below(2) ? 3 : 1;
  size_t n = 1 + rng.below(8);
  std::vector<Frame> frames;
  uint64_t seq = rng.below(100);
  for (size_t i = 0; i < n; ++i) {
    Frame f = testutil::make_frame("cam" + std::to_string(rng.below(3)), seq, w, h, channels);
    for (auto& p : f.pixels) p = static_cast<uint8_t>(rng.next());
    frames.push_back(std::move(f));
    seq += 1 + rng.below(5);
  }
  return frames;
}

}  // namespace

TEST_CASE("pack then read is byte-exact on every frame") {
  SplitMix64 rng(0x4656433100);
  for (int trial = 0; trial < 120; ++trial) {
    auto frames = random_batch(rng);
    double fps = 1.0 + static_cast<double>(rng.below(60));
    auto bytes = pack_chunk(frames, fps);
    Chunk chunk = read_chunk(bytes);
    CHECK(chunk.fps == fps);
    REQUIRE(chunk.frames.size() == frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
      REQUIRE(chunk.frames[i] == frames[i]);
      // stronger: the embedded record re-encodes to identical bytes
      REQUIRE(encode_frame(chunk.frames[i]) == encode_frame(frames[i]));
    }
  }
}

TEST_CASE("packing is deterministic") {
  SplitMix64 rng(0x4656433101);
  auto frames = random_batch(rng);
  CHECK(pack_chunk(frames, 25.0) == pack_chunk(frames, 25.0));
}

TEST_CASE("header starts with the container magic") {
  auto frames = std::vector<Frame>{testutil::make_frame("cam0", 0, 2, 2)};
  auto bytes = pack_chunk(frames, 25.0);
  REQUIRE(bytes.size() > 4);
  CHECK(bytes[0] == 'F');
  CHECK(bytes[1] == 'V');
  CHECK(bytes[2] == 'C');
  CHECK(bytes[3] == '1');
}

TEST_CASE("pack rejects malformed batches") {
  CHECK_THROWS_AS(pack_chunk({}, 25.0), InvariantViolation);
  std::vector<Frame> frames{testutil::make_frame("cam0", 0, 2, 2)};
  CHECK_THROWS_AS(pack_chunk(frames, 0.0), InvariantViolation);
  CHECK_THROWS_AS(pack_chunk(frames, -1.0), InvariantViolation);

  std::vector<Frame> unordered{testutil::make_frame("cam0", 5, 2, 2),
                               testutil::make_frame("cam0", 4, 2, 2)};
  CHECK_THROWS_AS(pack_chunk(unordered, 25.0), InvariantViolation);
  std::vector<Frame> duplicate{testutil::make_frame("cam0", 5, 2, 2),
                               testutil::make_frame("cam0", 5, 2, 2)};
  CHECK_THROWS_AS(pack_chunk(duplicate, 25.0), InvariantViolation);
  std::vector<Frame> mixed{testutil::make_frame("cam0", 1, 2, 2),
                           testutil::make_frame("cam0", 2, 3, 2)};
  CHECK_THROWS_AS(pack_chunk(mixed, 25.0), InvariantViolation);
}

TEST_CASE("single corrupted body byte trips the checksum") {
  SplitMix64 rng(0x4656433102);
  auto frames = random_batch(rng);
  auto bytes = pack_chunk(frames, 30.0);
  // first body byte: right after magic(4) + count(4) + fps(8) + dims(4+4+1)
  size_t body_start = 4 + 4 + 8 + 4 + 4 + 1;
  REQUIRE(bytes.size() > body_start + 4);

  for (int i = 0; i < 20; ++i) {
    auto corrupt = bytes;
    size_t pos = body_start + rng.below(bytes.size() - body_start - 4);
    corrupt[pos] ^= static_cast<uint8_t>(1 + rng.below(255));
    CHECK_THROWS_AS((void)read_chunk(corrupt), Error);
  }

  // corrupting the footer itself is always a CRC mismatch
  auto bad_crc = bytes;
  bad_crc.back() ^= 0xFF;
  CHECK_THROWS_AS((void)read_chunk(bad_crc), CrcMismatch);
}

TEST_CASE("reader rejects structural damage") {
  auto frames = std::vector<Frame>{testutil::make_frame("cam0", 0, 3, 3),
                                   testutil::make_frame("cam0", 1, 3, 3)};
  auto bytes = pack_chunk(frames, 25.0);

  CHECK_THROWS_AS((void)read_chunk({}), Truncated);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS((void)read_chunk(bad_magic), BadMagic);

  for (size_t cut : {bytes.size() - 1, bytes.size() - 5, size_t{10}, size_t{3}}) {
    std::vector<uint8_t> truncated(bytes.begin(), bytes.begin() + cut);
    CHECK_THROWS_AS((void)read_chunk(truncated), Error);
  }

  auto trailing = bytes;
  trailing.push_back(0x00);
  CHECK_THROWS_AS((void)read_chunk(trailing), Error);
}

TEST_CASE("chunk files round-trip through disk") {
  testutil::TempDir dir("chunk");
  SplitMix64 rng(0x4656433103);
  auto frames = random_batch(rng);
  auto bytes = pack_chunk(frames, 25.0);

  std::string path = dir.file("chunk_test.fvc");
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  CHECK(read_file_bytes(path) == bytes);
  Chunk chunk = read_chunk_file(path);
  REQUIRE(chunk.frames.size() == frames.size());
  for (size_t i = 0; i < frames.size(); ++i) CHECK(chunk.frames[i] == frames[i]);

  CHECK_THROWS_AS((void)read_file_bytes(dir.file("missing.fvc")), IoError);
}
