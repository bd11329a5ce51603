#include "vigil/netpbm.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "vigil/errors.hpp"

namespace vigil::netpbm {

namespace {

constexpr uint64_t kMaxPixels = 1ull << 28;  // 256M pixels, plenty for any camera here

// Skips whitespace and `#` comments between header tokens. Comments of the
// form `# ts=<int>` are captured so a writer-stamped timestamp round-trips.
void skip_separators(std::istream& in, Image& img) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) return;
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      auto pos = line.find("ts=");
      if (pos != std::string::npos) {
        int64_t ts = 0;
        const char* begin = line.data() + pos + 3;
        const char* end = line.data() + line.size();
        if (std::from_chars(begin, end, ts).ec == std::errc{}) img.timestamp_ms = ts;
      }
      continue;
    }
    if (!std::isspace(c)) return;
    in.get();
  }
}

uint64_t read_header_int(std::istream& in, Image& img) {
  skip_separators(in, img);
  uint64_t value = 0;
  bool any = false;
  for (;;) {
    int c = in.peek();
    if (c == EOF || !std::isdigit(c)) break;
    in.get();
    value = value * 10 + static_cast<uint64_t>(c - '0');
    if (value > std::numeric_limits<uint32_t>::max())
      throw DecodeError("netpbm header value out of range");
    any = true;
  }
  if (!any) throw DecodeError("netpbm header missing integer");
  return value;
}

}  // namespace

Image read(std::istream& in) {
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in) throw DecodeError("netpbm input too short for magic");
  if (m0 != 'P' || (m1 != '5' && m1 != '6')) throw DecodeError("not a binary PGM/PPM file");

  Image img;
  img.channels = (m1 == '5') ? 1 : 3;
  img.width = static_cast<uint32_t>(read_header_int(in, img));
  img.height = static_cast<uint32_t>(read_header_int(in, img));
  uint64_t maxval = read_header_int(in, img);
  if (img.width == 0 || img.height == 0) throw DecodeError("netpbm dimensions must be positive");
  if (static_cast<uint64_t>(img.width) * img.height > kMaxPixels)
    throw DecodeError("netpbm image too large");
  if (maxval != 255) throw DecodeError("only maxval 255 is supported");

  // Exactly one whitespace byte separates the header from the raster.
  int c = in.get();
  if (c == EOF || !std::isspace(c)) throw DecodeError("missing raster separator");

  size_t raster = static_cast<size_t>(img.width) * img.height * img.channels;
  img.pixels.resize(raster);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(raster));
  if (static_cast<size_t>(in.gcount()) != raster) throw DecodeError("netpbm raster cut short");
  return img;
}

Image read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  return read(in);
}

namespace {
std::vector<uint8_t> write_impl(const Image& img, char magic, uint8_t channels) {
  if (img.channels != channels) throw InvariantViolation("channel count does not match format");
  if (img.pixels.size() != static_cast<size_t>(img.width) * img.height * channels)
    throw InvariantViolation("pixel buffer length does not match dimensions");
  std::ostringstream header;
  header << 'P' << magic << '\n';
  if (img.timestamp_ms) header << "# ts=" << *img.timestamp_ms << '\n';
  header << img.width << ' ' << img.height << "\n255\n";
  std::string h = header.str();
  std::vector<uint8_t> out(h.begin(), h.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}
}  // namespace

std::vector<uint8_t> write_ppm(const Image& img) { return write_impl(img, '6', 3); }
std::vector<uint8_t> write_pgm(const Image& img) { return write_impl(img, '5', 1); }

std::vector<uint8_t> write_frame_ppm(const Frame& frame) {
  validate_frame(frame);
  Image img;
  img.width = frame.width;
  img.height = frame.height;
  img.channels = 3;
  img.timestamp_ms = frame.timestamp_ms;
  if (frame.channels == 3) {
    img.pixels = frame.pixels;
  } else {
    img.pixels.resize(frame.pixel_count() * 3);
    for (size_t i = 0; i < frame.pixel_count(); ++i) {
      uint8_t g = frame.pixels[i];
      img.pixels[3 * i] = g;
      img.pixels[3 * i + 1] = g;
      img.pixels[3 * i + 2] = g;
    }
  }
  return write_ppm(img);
}

Frame to_frame(const Image& img, const std::string& stream_id, uint64_t sequence_nr) {
  Frame frame;
  frame.stream_id = stream_id;
  frame.sequence_nr = sequence_nr;
  frame.timestamp_ms = img.timestamp_ms.value_or(0);
  frame.width = img.width;
  frame.height = img.height;
  frame.channels = img.channels;
  frame.pixels = img.pixels;
  return frame;
}

}  // namespace vigil::netpbm
