#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace vigil {

// Millisecond time source. The wall clock drives production runs; the
// virtual clock starts at zero and only moves when the runtime advances it,
// which makes timeout and tick behavior reproducible in tests.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual int64_t now_ms() const = 0;
  virtual bool is_virtual() const = 0;
};

class WallClock final : public Clock {
 public:
  int64_t now_ms() const override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
  bool is_virtual() const override { return false; }
};

class VirtualClock final : public Clock {
 public:
  int64_t now_ms() const override { return now_.load(std::memory_order_relaxed); }
  bool is_virtual() const override { return true; }

  // Never moves backwards. Written by one advancing thread at a time; reads
  // can come from any worker, hence the atomic.
  void advance_to(int64_t t_ms) {
    int64_t cur = now_.load(std::memory_order_relaxed);
    while (t_ms > cur && !now_.compare_exchange_weak(cur, t_ms, std::memory_order_relaxed)) {
    }
  }

 private:
  std::atomic<int64_t> now_{0};
};

}  // namespace vigil
