#pragma once

#include <chrono>
#include <cstdint>

namespace logiparam {

// Wall-clock budget handed down through solver / prover calls. Unlimited by default.
class Budget {
 public:
  Budget() = default;

  static Budget unlimited() { return Budget(); }
  static Budget from_ms(std::int64_t ms) {
    Budget b;
    b.enabled_ = true;
    b.deadline_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
    return b;
  }

  // Whichever of the two runs out first; unlimited sides impose nothing.
  static Budget earlier(const Budget& a, const Budget& b) {
    if (!a.enabled_) return b;
    if (!b.enabled_) return a;
    return a.deadline_ < b.deadline_ ? a : b;
  }

  bool exceeded() const {
    return enabled_ && std::chrono::steady_clock::now() > deadline_;
  }

 private:
  bool enabled_ = false;
  std::chrono::steady_clock::time_point deadline_{};
};

}  // namespace logiparam
