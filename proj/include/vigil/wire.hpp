#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil::wire {

// Little-endian byte stream helpers shared by the frame and chunk codecs.
// All multi-byte integers are written least significant byte first,
// regardless of host order.

class Writer {
 public:
  std::vector<uint8_t> take() { return std::move(buf_); }
  const std::vector<uint8_t>& bytes() const { return buf_; }
  size_t size() const { return buf_.size(); }

  void u8(uint8_t v) { buf_.push_back(v); }

  void u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

  void raw(std::span<const uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

  void magic(const char (&m)[5]) {
    buf_.insert(buf_.end(), reinterpret_cast<const uint8_t*>(m), reinterpret_cast<const uint8_t*>(m) + 4);
  }

  // u16 length prefix + UTF-8 bytes
  void str16(const std::string& s) {
    if (s.size() > UINT16_MAX) throw InvariantViolation("string too long for u16 length prefix");
    u16(static_cast<uint16_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::span<const uint8_t> raw(size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  // Checks a 4-byte magic. Distinguishes "not enough bytes" from
  // "wrong magic" so callers can report the right error.
  void expect_magic(const char (&m)[5]) {
    if (remaining() < 4) throw Truncated("input shorter than magic");
    if (std::memcmp(data_.data() + pos_, m, 4) != 0)
      throw BadMagic(std::string("expected magic ") + m);
    pos_ += 4;
  }

  std::string str16() {
    uint16_t n = u16();
    auto bytes = raw(n);
    return std::string(bytes.begin(), bytes.end());
  }

 private:
  void need(size_t n) const {
    if (remaining() < n) throw Truncated("unexpected end of input");
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace vigil::wire
