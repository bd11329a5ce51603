#include <doctest.h>

#include "vigil/integral.hpp"
#include "vigil/rng.hpp"

#include "helpers.hpp"

using namespace vigil;
using namespace vigil::detect;

TEST_CASE("tiny image total matches by hand") {
  Frame f = testutil::make_frame("cam0", 0, 2, 2);
  f.pixels = {1, 2, 3, 4};
  IntegralImage ii = integral_image(f);
  CHECK(ii.at(2, 2) == 10);
  CHECK(ii.at(1, 1) == 1);
  CHECK(ii.rect_sum(1, 0, 1, 2) == 6);  // right column: 2 + 4
  CHECK(ii.sq_at(2, 2) == 1 + 4 + 9 + 16);
}

TEST_CASE("zero image gives zero tables") {
  Frame f = testutil::make_frame("cam0", 0, 5, 3, 1, 0);
  IntegralImage ii = integral_image(f);
  for (auto v : ii.sum) CHECK(v == 0);
  for (auto v : ii.sq_sum) CHECK(v == 0);
}

TEST_CASE("border row and column are all zeros") {
  Frame f = testutil::make_frame("cam0", 0, 4, 4, 1, 200);
  IntegralImage ii = integral_image(f);
  for (uint32_t x = 0; x <= 4; ++x) CHECK(ii.at(x, 0) == 0);
  for (uint32_t y = 0; y <= 4; ++y) CHECK(ii.at(0, y) == 0);
}

TEST_CASE("tables are monotone along rows and columns") {
  SplitMix64 rng(0x4949);
  Frame f = testutil::make_frame("cam0", 0, 9, 7);
  for (auto& p : f.pixels) p = static_cast<uint8_t>(rng.below(256));
  IntegralImage ii = integral_image(f);
  for (uint32_t y = 0; y <= 7; ++y)
    for (uint32_t x = 1; x <= 9; ++x) CHECK(ii.at(x, y) >= ii.at(x - 1, y));
  for (uint32_t x = 0; x <= 9; ++x)
    for (uint32_t y = 1; y <= 7; ++y) CHECK(ii.at(x, y) >= ii.at(x, y - 1));
}

TEST_CASE("rect sums equal naive loops exactly on 100 random images") {
  SplitMix64 rng(0x524543);
  for (int image = 0; image < 100; ++image) {
    Frame f = testutil::make_frame("cam0", 0, 32, 32);
    for (auto& p : f.pixels) p = static_cast<uint8_t>(rng.below(256));
    IntegralImage ii = integral_image(f);
    for (int r = 0; r < 50; ++r) {
      uint32_t x = static_cast<uint32_t>(rng.below(32));
      uint32_t y = static_cast<uint32_t>(rng.below(32));
      uint32_t w = 1 + static_cast<uint32_t>(rng.below(32 - x));
      uint32_t h = 1 + static_cast<uint32_t>(rng.below(32 - y));
      int64_t naive = 0;
      int64_t naive_sq = 0;
      for (uint32_t yy = y; yy < y + h; ++yy) {
        for (uint32_t xx = x; xx < x + w; ++xx) {
          int64_t v = f.at(xx, yy);
          naive += v;
          naive_sq += v * v;
        }
      }
      REQUIRE(ii.rect_sum(x, y, w, h) == naive);
      REQUIRE(ii.rect_sq_sum(x, y, w, h) == naive_sq);
    }
  }
}
