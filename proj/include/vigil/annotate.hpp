#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "vigil/model.hpp"

namespace vigil::annotate {

using Rgb = std::array<uint8_t, 3>;

// Drawing style for labelled boxes: 1 px perimeter in the label's color,
// label text in 5x7 bitmap glyphs starting 1 px inside the box corner.
struct LabelStyle {
  std::map<std::string, Rgb> box_colors;
  Rgb fallback_color{255, 255, 255};
};

LabelStyle default_label_style();  // face -> green, person -> red

// Five column bytes of the glyph, bit 0 the top pixel; all-zero columns for
// characters outside ASCII 32..126.
std::span<const uint8_t, 5> glyph_columns(char c);

// Pure: returns a new RGB frame with every descriptor's bbox perimeter and
// label text drawn; all other pixels equal the input (grayscale expanded).
// Drawing is clipped at the frame boundary, never at the box.
Frame label_frame(const Frame& frame, const LabelStyle& style);

// Union of the two frames' feature lists on one frame. Both frames must
// agree on (streamId, sequenceNr) and image content; features come out
// sorted by name, duplicate descriptors collapsed.
Frame merge_features(const Frame& a, const Frame& b);

// Grayscale input expanded to 3 channels; RGB input returned as-is.
Frame to_rgb(const Frame& frame);

}  // namespace vigil::annotate
