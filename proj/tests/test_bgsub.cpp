#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <deque>
#include <set>

#include "vigil/bgsub.hpp"
#include "vigil/rng.hpp"

#include "helpers.hpp"

using namespace vigil;
using namespace vigil::bgsub;

TEST_CASE("grayscale conversion uses the standard luma weights") {
  Frame f = testutil::make_frame("cam0", 0, 3, 1, 3);
  // white, pure red, pure blue
  f.pixels = {255, 255, 255, 255, 0, 0, 0, 0, 255};
  Frame g = to_grayscale(f);
  CHECK(g.channels == 1);
  CHECK(g.pixels[0] == 255);
  CHECK(g.pixels[1] == 76);   // round(0.299 * 255)
  CHECK(g.pixels[2] == 29);   // round(0.114 * 255)
}

TEST_CASE("grayscale conversion is the identity on grayscale input") {
  SplitMix64 rng(0x6772);
  Frame f = testutil::make_frame("cam0", 0, 7, 5, 1);
  for (auto& p : f.pixels) p = static_cast<uint8_t>(rng.below(256));
  Frame g = to_grayscale(f);
  CHECK(g.pixels == f.pixels);
  CHECK(g.features == f.features);
}

TEST_CASE("accumulator seeds from the first frame and averages afterwards") {
  BackgroundModel model(0.5);
  Frame a = testutil::make_frame("cam0", 0, 2, 1, 1, 100);
  accumulate_weighted(model, a);
  CHECK(model.initialized);
  CHECK(model.accumulator[0] == doctest::Approx(100.0));

  Frame b = testutil::make_frame("cam0", 1, 2, 1, 1, 200);
  accumulate_weighted(model, b);
  CHECK(model.accumulator[0] == doctest::Approx(150.0));  // midpoint at alpha 0.5
}

TEST_CASE("learning rate must lie strictly inside (0,1)") {
  CHECK_THROWS_AS(BackgroundModel(0.0), InvariantViolation);
  CHECK_THROWS_AS(BackgroundModel(1.0), InvariantViolation);
  CHECK_THROWS_AS(BackgroundModel(-0.3), InvariantViolation);

  // near one, the model all but forgets the past in a single step
  BackgroundModel model(0.999);
  accumulate_weighted(model, testutil::make_frame("cam0", 0, 3, 3, 1, 17));
  accumulate_weighted(model, testutil::make_frame("cam0", 1, 3, 3, 1, 213));
  for (double v : model.accumulator) CHECK(v == doctest::Approx(213.0).epsilon(0.01));
}

TEST_CASE("dimension mismatch raises") {
  BackgroundModel model(0.1);
  accumulate_weighted(model, testutil::make_frame("cam0", 0, 4, 4));
  CHECK_THROWS_AS(accumulate_weighted(model, testutil::make_frame("cam0", 1, 5, 4)), DimsMismatch);
}

TEST_CASE("static scene with a 255 gap converges under one level in 109 frames") {
  BackgroundModel model(0.05);
  accumulate_weighted(model, testutil::make_frame("cam0", 0, 4, 4, 1, 0));
  Frame scene = testutil::make_frame("cam0", 1, 4, 4, 1, 255);
  int frames_needed = 0;
  for (int i = 1; i <= 200; ++i) {
    accumulate_weighted(model, scene);
    double max_gap = 0.0;
    for (double v : model.accumulator) max_gap = std::max(max_gap, std::abs(v - 255.0));
    if (max_gap < 1.0) {
      frames_needed = i;
      break;
    }
  }
  CHECK(frames_needed > 0);
  CHECK(frames_needed <= 109);
  // and not dramatically sooner: the bound is tight for pure decay
  CHECK(frames_needed >= 107);
}

TEST_CASE("gap decays geometrically by (1 - alpha) per step") {
  SplitMix64 rng(0xDECAF);
  for (int trial = 0; trial < 20; ++trial) {
    double alpha = 0.01 + static_cast<double>(rng.below(90)) / 100.0;
    BackgroundModel model(alpha);
    uint8_t start = static_cast<uint8_t>(rng.below(128));
    uint8_t target = static_cast<uint8_t>(128 + rng.below(128));
    accumulate_weighted(model, testutil::make_frame("cam0", 0, 2, 2, 1, start));
    Frame scene = testutil::make_frame("cam0", 1, 2, 2, 1, target);
    double gap = std::abs(static_cast<double>(target) - start);
    for (int step = 0; step < 15; ++step) {
      accumulate_weighted(model, scene);
      double expected = gap * (1.0 - alpha);
      double actual = std::abs(target - model.accumulator[0]);
      CHECK(actual == doctest::Approx(expected).epsilon(1e-9));
      gap = actual;
    }
  }
}

TEST_CASE("mask equals the per-pixel oracle") {
  SplitMix64 rng(0x4D41534B);
  for (int trial = 0; trial < 100; ++trial) {
    uint32_t w = 1 + static_cast<uint32_t>(rng.below(16));
    uint32_t h = 1 + static_cast<uint32_t>(rng.below(16));
    BackgroundModel model(0.3);
    Frame base = testutil::make_frame("cam0", 0, w, h);
    for (auto& p : base.pixels) p = static_cast<uint8_t>(rng.below(256));
    accumulate_weighted(model, base);
    Frame cur = testutil::make_frame("cam0", 1, w, h);
    for (auto& p : cur.pixels) p = static_cast<uint8_t>(rng.below(256));
    accumulate_weighted(model, cur);

    BlobGateConfig cfg;
    cfg.diff_threshold = 1 + static_cast<int>(rng.below(255));
    BinaryMask mask = abs_diff_threshold(model, cur, cfg);
    REQUIRE(mask.data.size() == cur.pixels.size());
    for (size_t i = 0; i < cur.pixels.size(); ++i) {
      long diff = std::labs(std::lround(model.accumulator[i]) - static_cast<long>(cur.pixels[i]));
      uint8_t expected = diff > cfg.diff_threshold ? 255 : 0;
      REQUIRE(mask.data[i] == expected);
    }
  }
}

TEST_CASE("identical frame and model give an all-zero mask") {
  BackgroundModel model(0.2);
  Frame f = testutil::make_frame("cam0", 0, 6, 4, 1, 99);
  accumulate_weighted(model, f);
  BinaryMask mask = abs_diff_threshold(model, f, BlobGateConfig{});
  for (uint8_t v : mask.data) CHECK(v == 0);
}

TEST_CASE("thresholding before initialization raises") {
  BackgroundModel model(0.2);
  CHECK_THROWS_AS(abs_diff_threshold(model, testutil::make_frame("cam0", 0, 2, 2), BlobGateConfig{}),
                  Uninitialized);
}

TEST_CASE("connected components: empty mask, diagonal touch, ordering") {
  BinaryMask mask;
  mask.width = 4;
  mask.height = 4;
  mask.data.assign(16, 0);
  CHECK(connected_components(mask).empty());

  // diagonal neighbours join under 8-connectivity
  mask.data[0 * 4 + 0] = 255;
  mask.data[1 * 4 + 1] = 255;
  auto blobs = connected_components(mask);
  REQUIRE(blobs.size() == 1);
  CHECK(blobs[0].area == 2);
  CHECK(blobs[0].bbox == Rect{0, 0, 2, 2});

  // second blob lower in the image: order is by (bbox.y, bbox.x)
  mask.data[3 * 4 + 3] = 255;
  blobs = connected_components(mask);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].bbox.y == 0);
  CHECK(blobs[1].bbox == Rect{3, 3, 1, 1});
}

namespace {

// Independent 4/8-neighbour flood fill used as the oracle.
std::vector<uint64_t> flood_fill_areas(const BinaryMask& mask) {
  std::vector<uint64_t> areas;
  std::vector<char> seen(mask.data.size(), 0);
  for (uint32_t y = 0; y < mask.height; ++y) {
    for (uint32_t x = 0; x < mask.width; ++x) {
      size_t idx = static_cast<size_t>(y) * mask.width + x;
      if (mask.data[idx] != 255 || seen[idx]) continue;
      uint64_t area = 0;
      std::deque<std::pair<uint32_t, uint32_t>> frontier{{x, y}};
      seen[idx] = 1;
      while (!frontier.empty()) {
        auto [cx, cy] = frontier.front();
        frontier.pop_front();
        ++area;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int64_t nx = static_cast<int64_t>(cx) + dx;
            int64_t ny = static_cast<int64_t>(cy) + dy;
            if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
            size_t nidx = static_cast<size_t>(ny) * mask.width + nx;
            if (mask.data[nidx] == 255 && !seen[nidx]) {
              seen[nidx] = 1;
              frontier.emplace_back(static_cast<uint32_t>(nx), static_cast<uint32_t>(ny));
            }
          }
        }
      }
      areas.push_back(area);
    }
  }
  std::sort(areas.begin(), areas.end());
  return areas;
}

}  // namespace

TEST_CASE("component areas match a flood-fill oracle on 200 random masks") {
  SplitMix64 rng(0xB10B);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask mask;
    mask.width = 64;
    mask.height = 64;
    mask.data.resize(64 * 64);
    // vary density so some masks are sparse and some nearly solid
    uint64_t density = 10 + rng.below(85);
    for (auto& v : mask.data) v = rng.below(100) < density ? 255 : 0;

    auto blobs = connected_components(mask);
    std::vector<uint64_t> areas;
    uint64_t covered = 0;
    for (const auto& b : blobs) {
      areas.push_back(b.area);
      covered += b.area;
      REQUIRE(b.area >= 1);
      REQUIRE(b.area <= static_cast<uint64_t>(b.bbox.w) * b.bbox.h);
    }
    std::sort(areas.begin(), areas.end());
    REQUIRE(areas == flood_fill_areas(mask));
    uint64_t on_pixels = 0;
    for (auto v : mask.data) on_pixels += v == 255 ? 1 : 0;
    REQUIRE(covered == on_pixels);
  }
}

TEST_CASE("gate is strict at exactly ten percent") {
  BlobGateConfig cfg;  // min_blob_ratio 0.10
  uint64_t frame_area = 640ULL * 480ULL;
  std::vector<Blob> blobs{{30720, {0, 0, 192, 160}}};  // exactly 10%
  CHECK(!foreground_gate(blobs, frame_area, cfg));
  CHECK(gating_blob(blobs, frame_area, cfg) == nullptr);

  blobs[0].area = 31000;  // 10.09%
  CHECK(foreground_gate(blobs, frame_area, cfg));
  CHECK(gating_blob(blobs, frame_area, cfg) == &blobs[0]);

  CHECK(!foreground_gate({}, frame_area, cfg));
}

TEST_CASE("gate considers the largest blob only") {
  BlobGateConfig cfg;
  uint64_t frame_area = 100 * 100;
  // two blobs of 6% each: sum exceeds 10% but neither alone does
  std::vector<Blob> blobs{{600, {0, 0, 30, 20}}, {600, {0, 50, 30, 20}}};
  CHECK(!foreground_gate(blobs, frame_area, cfg));
  blobs[1].area = 1001;
  CHECK(foreground_gate(blobs, frame_area, cfg));
  CHECK(gating_blob(blobs, frame_area, cfg)->area == 1001);
}

TEST_CASE("growing the foreground never closes the gate") {
  SplitMix64 rng(0x47415445);
  BlobGateConfig cfg;
  uint64_t frame_area = 200 * 200;
  for (int trial = 0; trial < 50; ++trial) {
    uint64_t area = 1 + rng.below(frame_area);
    std::vector<Blob> blobs{{area, {0, 0, 200, 200}}};
    bool before = foreground_gate(blobs, frame_area, cfg);
    blobs[0].area = std::min<uint64_t>(frame_area, area + 1 + rng.below(1000));
    bool after = foreground_gate(blobs, frame_area, cfg);
    if (before) CHECK(after);
  }
}

TEST_CASE("after a permanent scene switch the gate closes within the geometric bound") {
  // 16x16 scene, alpha 0.05, diff threshold 25. After the switch every pixel
  // differs by 200, the whole frame is foreground, and the gate stays open
  // until the accumulator closes to within the threshold.
  BlobGateConfig cfg;
  BackgroundModel model(0.05);
  Frame old_scene = testutil::make_frame("cam0", 0, 16, 16, 1, 20);
  accumulate_weighted(model, old_scene);
  Frame new_scene = testutil::make_frame("cam0", 1, 16, 16, 1, 220);

  int bound = static_cast<int>(
      std::ceil(std::log(cfg.diff_threshold / 255.0) / std::log(1.0 - model.alpha)));
  int frames_until_closed = -1;
  for (int i = 1; i <= bound + 5; ++i) {
    accumulate_weighted(model, new_scene);
    BinaryMask mask = abs_diff_threshold(model, new_scene, cfg);
    auto blobs = connected_components(mask);
    if (!foreground_gate(blobs, 16 * 16, cfg)) {
      frames_until_closed = i;
      break;
    }
  }
  REQUIRE(frames_until_closed > 0);
  CHECK(frames_until_closed <= bound);
}
