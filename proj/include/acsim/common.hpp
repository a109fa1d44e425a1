#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace acsim {

using NodeId = uint32_t;
constexpr NodeId kNoNode = UINT32_MAX;

// Error raised when a "whp" event fails at small n (hitting set missed,
// receive capacity exceeded during a randomized scatter, ...). The harness
// retries the whole protocol with a fresh seed, up to the retry budget.
class RetryableError : public std::runtime_error {
 public:
  explicit RetryableError(const std::string& what) : std::runtime_error(what) {}
};

class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

class TimeoutError : public std::runtime_error {
 public:
  explicit TimeoutError(const std::string& what) : std::runtime_error(what) {}
};

// ceil(log2(n)) clamped to >= 1.
inline uint32_t log2_ceil(uint64_t n) {
  uint32_t l = 0;
  uint64_t p = 1;
  while (p < n) {
    p <<= 1;
    ++l;
  }
  return l < 1 ? 1 : l;
}

inline uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + b + (a << 6) + (a >> 2)));
}

// Small deterministic RNG (splitmix64 stream). Stable across platforms so
// that seeded runs are reproducible byte-for-byte.
class Rng {
 public:
  Rng() : state_(0x853c49e6748fea9bULL) {}
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x2545f4914f6cdd1dULL)) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, bound), bound >= 1 (Lemire's method, unbiased)
  uint64_t uniform(uint64_t bound) {
    __uint128_t m = (__uint128_t)next() * bound;
    uint64_t lo = (uint64_t)m;
    if (lo < bound) {
      uint64_t t = -bound % bound;
      while (lo < t) {
        m = (__uint128_t)next() * bound;
        lo = (uint64_t)m;
      }
    }
    return (uint64_t)(m >> 64);
  }

  // true with probability num/den
  bool chance(uint64_t num, uint64_t den) { return uniform(den) < num; }

  double uniform_real() { return (next() >> 11) * (1.0 / 9007199254740992.0); }

 private:
  uint64_t state_;
};

// Derives an independent stream for (seed, domain, index). Used to split the
// master seed into per-node program streams, transport streams and token
// material without any cross-contamination.
inline Rng derive_rng(uint64_t seed, uint64_t domain, uint64_t index) {
  return Rng(hash_combine(hash_combine(seed, domain), index));
}

// stream domains
constexpr uint64_t kDomainProgram = 0x50524f47;    // per-node program streams
constexpr uint64_t kDomainTransport = 0x5452414e;  // simulator-internal randomness
constexpr uint64_t kDomainTokens = 0x544f4b;       // communication-token material
constexpr uint64_t kDomainHarness = 0x4841524e;    // generators, retries

}  // namespace acsim
