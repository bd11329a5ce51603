#include <doctest.h>

#include <fstream>
#include <sstream>

#include "vigil/netpbm.hpp"
#include "vigil/rng.hpp"

#include "helpers.hpp"

using namespace vigil;

namespace {

netpbm::Image random_image(SplitMix64& rng, uint8_t channels) {
  netpbm::Image img;
  img.width = 1 + static_cast<uint32_t>(rng.below(32));
  img.height = 1 + static_cast<uint32_t>(rng.below(32));
  img.channels = channels;
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * channels);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.below(256));
  return img;
}

netpbm::Image decode(const std::vector<uint8_t>& bytes) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  return netpbm::read(in);
}

}  // namespace

TEST_CASE("pgm and ppm round-trip losslessly") {
  SplitMix64 rng(0x50474D);
  for (int i = 0; i < 200; ++i) {
    uint8_t channels = (i % 2 == 0) ? 1 : 3;
    auto img = random_image(rng, channels);
    auto bytes = channels == 1 ? netpbm::write_pgm(img) : netpbm::write_ppm(img);
    auto back = decode(bytes);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.channels == img.channels);
    CHECK(back.pixels == img.pixels);
  }
}

TEST_CASE("timestamp comments survive the round trip") {
  netpbm::Image img;
  img.width = 2;
  img.height = 2;
  img.channels = 1;
  img.pixels = {1, 2, 3, 4};
  img.timestamp_ms = 123456789;
  auto back = decode(netpbm::write_pgm(img));
  CHECK(back.timestamp_ms == std::optional<int64_t>(123456789));

  img.timestamp_ms.reset();
  back = decode(netpbm::write_pgm(img));
  CHECK(!back.timestamp_ms.has_value());
}

TEST_CASE("reader accepts standard headers with comments and odd whitespace") {
  std::string doc = "P5\n# a comment\n  3 2\n# another\n255\nABCDEF";
  std::istringstream in(doc);
  auto img = netpbm::read(in);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.channels == 1);
  CHECK(img.pixels == std::vector<uint8_t>{'A', 'B', 'C', 'D', 'E', 'F'});
}

TEST_CASE("reader rejects malformed documents") {
  auto reject = [](const std::string& doc) {
    std::istringstream in(doc);
    CHECK_THROWS_AS(netpbm::read(in), DecodeError);
  };
  reject("");
  reject("P4\n2 2\n255\nAAAA");          // unsupported magic
  reject("P5\n2 2\n65535\nAAAA");        // wrong maxval
  reject("P5\n2 2\n255\nAB");            // short raster
  reject("P5\n-2 2\n255\nAAAA");         // negative dimension
  reject("P5\n999999999 999999999\n255\n");  // absurd dimensions
}

TEST_CASE("frame adapter expands grayscale to rgb on write") {
  Frame f = testutil::make_frame("cam0", 5, 2, 1);
  f.pixels = {10, 200};
  auto bytes = netpbm::write_frame_ppm(f);
  auto img = decode(bytes);
  CHECK(img.channels == 3);
  CHECK(img.pixels == std::vector<uint8_t>{10, 10, 10, 200, 200, 200});
}

TEST_CASE("to_frame carries identity and timestamp") {
  netpbm::Image img;
  img.width = 1;
  img.height = 1;
  img.channels = 3;
  img.pixels = {9, 8, 7};
  img.timestamp_ms = 777;
  Frame f = netpbm::to_frame(img, "lobby", 31);
  CHECK(f.stream_id == "lobby");
  CHECK(f.sequence_nr == 31);
  CHECK(f.timestamp_ms == 777);
  CHECK(f.channels == 3);
  CHECK(f.pixels == img.pixels);
}

TEST_CASE("read_file errors on a missing path") {
  CHECK_THROWS_AS(netpbm::read_file("/nonexistent/file.pgm"), Error);
}
