#include "vigil/annotate.hpp"

#include <algorithm>

#include "vigil/errors.hpp"

namespace vigil::annotate {

namespace {

// Classic 5x7 dot-matrix glyphs, ASCII 32..126. Column-major, bit 0 = top.
constexpr uint8_t kFont[95][5] = {
    {0x00, 0x00, 0x00, 0x00, 0x00},  // space
    {0x00, 0x00, 0x5F, 0x00, 0x00},  // !
    {0x00, 0x07, 0x00, 0x07, 0x00},  // "
    {0x14, 0x7F, 0x14, 0x7F, 0x14},  // #
    {0x24, 0x2A, 0x7F, 0x2A, 0x12},  // $
    {0x23, 0x13, 0x08, 0x64, 0x62},  // %
    {0x36, 0x49, 0x55, 0x22, 0x50},  // &
    {0x00, 0x05, 0x03, 0x00, 0x00},  // '
    {0x00, 0x1C, 0x22, 0x41, 0x00},  // (
    {0x00, 0x41, 0x22, 0x1C, 0x00},  // )
    {0x14, 0x08, 0x3E, 0x08, 0x14},  // *
    {0x08, 0x08, 0x3E, 0x08, 0x08},  // +
    {0x00, 0x50, 0x30, 0x00, 0x00},  // ,
    {0x08, 0x08, 0x08, 0x08, 0x08},  // -
    {0x00, 0x60, 0x60, 0x00, 0x00},  // .
    {0x20, 0x10, 0x08, 0x04, 0x02},  // /
    {0x3E, 0x51, 0x49, 0x45, 0x3E},  // 0
    {0x00, 0x42, 0x7F, 0x40, 0x00},  // 1
    {0x42, 0x61, 0x51, 0x49, 0x46},  // 2
    {0x21, 0x41, 0x45, 0x4B, 0x31},  // 3
    {0x18, 0x14, 0x12, 0x7F, 0x10},  // 4
    {0x27, 0x45, 0x45, 0x45, 0x39},  // 5
    {0x3C, 0x4A, 0x49, 0x49, 0x30},  // 6
    {0x01, 0x71, 0x09, 0x05, 0x03},  // 7
    {0x36, 0x49, 0x49, 0x49, 0x36},  // 8
    {0x06, 0x49, 0x49, 0x29, 0x1E},  // 9
    {0x00, 0x36, 0x36, 0x00, 0x00},  // :
    {0x00, 0x56, 0x36, 0x00, 0x00},  // ;
    {0x08, 0x14, 0x22, 0x41, 0x00},  // <
    {0x14, 0x14, 0x14, 0x14, 0x14},  // =
    {0x00, 0x41, 0x22, 0x14, 0x08},  // >
    {0x02, 0x01, 0x51, 0x09, 0x06},  // ?
    {0x32, 0x49, 0x79, 0x41, 0x3E},  // @
    {0x7E, 0x11, 0x11, 0x11, 0x7E},  // A
    {0x7F, 0x49, 0x49, 0x49, 0x36},  // B
    {0x3E, 0x41, 0x41, 0x41, 0x22},  // C
    {0x7F, 0x41, 0x41, 0x22, 0x1C},  // D
    {0x7F, 0x49, 0x49, 0x49, 0x41},  // E
    {0x7F, 0x09, 0x09, 0x09, 0x01},  // F
    {0x3E, 0x41, 0x49, 0x49, 0x7A},  // G
    {0x7F, 0x08, 0x08, 0x08, 0x7F},  // H
    {0x00, 0x41, 0x7F, 0x41, 0x00},  // I
    {0x20, 0x40, 0x41, 0x3F, 0x01},  // J
    {0x7F, 0x08, 0x14, 0x22, 0x41},  // K
    {0x7F, 0x40, 0x40, 0x40, 0x40},  // L
    {0x7F, 0x02, 0x0C, 0x02, 0x7F},  // M
    {0x7F, 0x04, 0x08, 0x10, 0x7F},  // N
    {0x3E, 0x41, 0x41, 0x41, 0x3E},  // O
    {0x7F, 0x09, 0x09, 0x09, 0x06},  // P
    {0x3E, 0x41, 0x51, 0x21, 0x5E},  // Q
    {0x7F, 0x09, 0x19, 0x29, 0x46},  // R
    {0x46, 0x49, 0x49, 0x49, 0x31},  // S
    {0x01, 0x01, 0x7F, 0x01, 0x01},  // T
    {0x3F, 0x40, 0x40, 0x40, 0x3F},  // U
    {0x1F, 0x20, 0x40, 0x20, 0x1F},  // V
    {0x3F, 0x40, 0x38, 0x40, 0x3F},  // W
    {0x63, 0x14, 0x08, 0x14, 0x63},  // X
    {0x07, 0x08, 0x70, 0x08, 0x07},  // Y
    {0x61, 0x51, 0x49, 0x45, 0x43},  // Z
    {0x00, 0x7F, 0x41, 0x41, 0x00},  // [
    {0x02, 0x04, 0x08, 0x10, 0x20},  // backslash
    {0x00, 0x41, 0x41, 0x7F, 0x00},  // ]
    {0x04, 0x02, 0x01, 0x02, 0x04},  // ^
    {0x40, 0x40, 0x40, 0x40, 0x40},  // _
    {0x00, 0x01, 0x02, 0x04, 0x00},  // `
    {0x20, 0x54, 0x54, 0x54, 0x78},  // a
    {0x7F, 0x48, 0x44, 0x44, 0x38},  // b
    {0x38, 0x44, 0x44, 0x44, 0x20},  // c
    {0x38, 0x44, 0x44, 0x48, 0x7F},  // d
    {0x38, 0x54, 0x54, 0x54, 0x18},  // e
    {0x08, 0x7E, 0x09, 0x01, 0x02},  // f
    {0x0C, 0x52, 0x52, 0x52, 0x3E},  // g
    {0x7F, 0x08, 0x04, 0x04, 0x78},  // h
    {0x00, 0x44, 0x7D, 0x40, 0x00},  // i
    {0x20, 0x40, 0x44, 0x3D, 0x00},  // j
    {0x7F, 0x10, 0x28, 0x44, 0x00},  // k
    {0x00, 0x41, 0x7F, 0x40, 0x00},  // l
    {0x7C, 0x04, 0x18, 0x04, 0x78},  // m
    {0x7C, 0x08, 0x04, 0x04, 0x78},  // n
    {0x38, 0x44, 0x44, 0x44, 0x38},  // o
    {0x7C, 0x14, 0x14, 0x14, 0x08},  // p
    {0x08, 0x14, 0x14, 0x18, 0x7C},  // q
    {0x7C, 0x08, 0x04, 0x04, 0x08},  // r
    {0x48, 0x54, 0x54, 0x54, 0x20},  // s
    {0x04, 0x3F, 0x44, 0x40, 0x20},  // t
    {0x3C, 0x40, 0x40, 0x20, 0x7C},  // u
    {0x1C, 0x20, 0x40, 0x20, 0x1C},  // v
    {0x3C, 0x40, 0x30, 0x40, 0x3C},  // w
    {0x44, 0x28, 0x10, 0x28, 0x44},  // x
    {0x0C, 0x50, 0x50, 0x50, 0x3C},  // y
    {0x44, 0x64, 0x54, 0x4C, 0x44},  // z
    {0x00, 0x08, 0x36, 0x41, 0x00},  // {
    {0x00, 0x00, 0x7F, 0x00, 0x00},  // |
    {0x00, 0x41, 0x36, 0x08, 0x00},  // }
    {0x10, 0x08, 0x08, 0x10, 0x08},  // ~
};

constexpr uint8_t kBlankGlyph[5] = {0, 0, 0, 0, 0};

void put_pixel(Frame& rgb, int64_t x, int64_t y, const Rgb& color) {
  if (x < 0 || y < 0 || x >= rgb.width || y >= rgb.height) return;
  size_t i = (static_cast<size_t>(y) * rgb.width + static_cast<size_t>(x)) * 3;
  rgb.pixels[i] = color[0];
  rgb.pixels[i + 1] = color[1];
  rgb.pixels[i + 2] = color[2];
}

void draw_perimeter(Frame& rgb, const Rect& box, const Rgb& color) {
  for (uint32_t dx = 0; dx < box.w; ++dx) {
    put_pixel(rgb, static_cast<int64_t>(box.x) + dx, box.y, color);
    put_pixel(rgb, static_cast<int64_t>(box.x) + dx,
              static_cast<int64_t>(box.y) + box.h - 1, color);
  }
  for (uint32_t dy = 0; dy < box.h; ++dy) {
    put_pixel(rgb, box.x, static_cast<int64_t>(box.y) + dy, color);
    put_pixel(rgb, static_cast<int64_t>(box.x) + box.w - 1,
              static_cast<int64_t>(box.y) + dy, color);
  }
}

void draw_text(Frame& rgb, int64_t origin_x, int64_t origin_y, const std::string& text,
               const Rgb& color) {
  int64_t pen_x = origin_x;
  for (char c : text) {
    std::span<const uint8_t, 5> glyph = glyph_columns(c);
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        if (glyph[col] >> row & 1) put_pixel(rgb, pen_x + col, origin_y + row, color);
      }
    }
    pen_x += 6;  // 5 px glyph + 1 px gap
  }
}

}  // namespace

LabelStyle default_label_style() {
  LabelStyle style;
  style.box_colors["face"] = Rgb{0, 255, 0};
  style.box_colors["person"] = Rgb{255, 0, 0};
  return style;
}

std::span<const uint8_t, 5> glyph_columns(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  if (u < 32 || u > 126) return std::span<const uint8_t, 5>(kBlankGlyph);
  return std::span<const uint8_t, 5>(kFont[u - 32]);
}

Frame to_rgb(const Frame& frame) {
  validate_frame(frame);
  if (frame.channels == 3) return frame;
  Frame out = frame;
  out.channels = 3;
  out.pixels.resize(frame.pixels.size() * 3);
  for (size_t i = 0; i < frame.pixels.size(); ++i) {
    out.pixels[i * 3] = frame.pixels[i];
    out.pixels[i * 3 + 1] = frame.pixels[i];
    out.pixels[i * 3 + 2] = frame.pixels[i];
  }
  return out;
}

Frame label_frame(const Frame& frame, const LabelStyle& style) {
  Frame rgb = to_rgb(frame);
  for (const Feature& feature : frame.features) {
    for (const Descriptor& desc : feature.descriptors) {
      auto it = style.box_colors.find(desc.label);
      const Rgb& color = it != style.box_colors.end() ? it->second : style.fallback_color;
      draw_perimeter(rgb, desc.bbox, color);
      draw_text(rgb, static_cast<int64_t>(desc.bbox.x) + 1, static_cast<int64_t>(desc.bbox.y) + 1,
                desc.label, color);
    }
  }
  return rgb;
}

Frame merge_features(const Frame& a, const Frame& b) {
  if (a.stream_id != b.stream_id || a.sequence_nr != b.sequence_nr) {
    throw MismatchedIdentity("cannot merge frames with different identities");
  }
  if (a.width != b.width || a.height != b.height || a.channels != b.channels ||
      a.pixels != b.pixels) {
    throw MismatchedIdentity("same identity but different image content");
  }

  Frame out = a;
  out.features.clear();

  auto add = [&](const Feature& feature) {
    Feature* slot = nullptr;
    for (Feature& existing : out.features) {
      if (existing.name == feature.name) {
        slot = &existing;
        break;
      }
    }
    if (!slot) {
      out.features.push_back(Feature{feature.name, {}});
      slot = &out.features.back();
    }
    for (const Descriptor& desc : feature.descriptors) {
      if (std::find(slot->descriptors.begin(), slot->descriptors.end(), desc) ==
          slot->descriptors.end()) {
        slot->descriptors.push_back(desc);
      }
    }
  };
  for (const Feature& f : a.features) add(f);
  for (const Feature& f : b.features) add(f);

  std::sort(out.features.begin(), out.features.end(),
            [](const Feature& x, const Feature& y) { return x.name < y.name; });
  return out;
}

}  // namespace vigil::annotate
