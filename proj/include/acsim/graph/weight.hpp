#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace acsim {

// Saturating edge/distance weight over the (min,+) semiring. INF is a
// dedicated sentinel (absorbing under +), never a large number, so that
// infinite-weight padding edges can never shorten a path.
class Weight {
 public:
  static constexpr uint64_t kInfRaw = std::numeric_limits<uint64_t>::max();

  constexpr Weight() : v_(kInfRaw) {}
  constexpr explicit Weight(uint64_t v) : v_(v) {}

  static constexpr Weight inf() { return Weight(); }
  static constexpr Weight zero() { return Weight(0); }

  constexpr bool is_inf() const { return v_ == kInfRaw; }
  constexpr bool is_finite() const { return v_ != kInfRaw; }
  constexpr uint64_t raw() const { return v_; }

  friend constexpr Weight operator+(Weight a, Weight b) {
    if (a.is_inf() || b.is_inf()) return inf();
    uint64_t s = a.v_ + b.v_;
    if (s < a.v_ || s == kInfRaw) return inf();  // saturate, never wrap
    return Weight(s);
  }

  friend constexpr Weight min(Weight a, Weight b) { return a.v_ <= b.v_ ? a : b; }

  constexpr auto operator<=>(const Weight&) const = default;

  std::string str() const { return is_inf() ? "inf" : std::to_string(v_); }

 private:
  uint64_t v_;
};

constexpr Weight kInf = Weight::inf();

}  // namespace acsim
