#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace vigil {

// splitmix64: tiny, fast, and good enough for tuple ids and shuffle routing.
// Deterministic across platforms, which the reproducibility tests rely on.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = state_ += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) { return next() % n; }

  // Tuple ids must be nonzero for the XOR acker; redraw the (vanishingly
  // rare) zero.
  uint64_t nonzero() {
    uint64_t v;
    do {
      v = next();
    } while (v == 0);
    return v;
  }

 private:
  uint64_t state_;
};

inline uint64_t fnv1a64(const void* data, size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t hash = 14695981039346656037ULL;
  for (size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace vigil
