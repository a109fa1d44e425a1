#pragma once

#include <cstdint>
#include <vector>

#include "acsim/common.hpp"

namespace acsim {

// k-wise independent hash family h: {0,1}^a -> {0,1}^b, realized as a degree
// k-1 polynomial over GF(2^w) with w = max(a,b), evaluated at the key and
// truncated to b bits. Selecting a function costs exactly k*max(a,b) seed
// bits; the same seed always yields the same function.
class KwiseHash {
 public:
  KwiseHash() = default;

  // seed_bits must hold at least k*max(a,b) bits (packed little-endian in
  // 64-bit words); throws on short seeds.
  KwiseHash(const std::vector<uint64_t>& seed_bits, uint32_t seed_bit_len, uint32_t k, uint32_t a, uint32_t b);

  uint64_t operator()(uint64_t key) const;

  uint32_t k() const { return k_; }
  uint32_t a() const { return a_; }
  uint32_t b() const { return b_; }
  static uint32_t seed_bits_needed(uint32_t k, uint32_t a, uint32_t b) { return k * (a > b ? a : b); }

 private:
  uint32_t k_ = 0, a_ = 0, b_ = 0, w_ = 0;
  uint64_t red_ = 0;  // reduction polynomial (low bits of x^w + red_)
  std::vector<uint64_t> coeff_;
};

// convenience: derive the packed seed words from an rng
std::vector<uint64_t> sample_hash_seed(Rng& rng, uint32_t k, uint32_t a, uint32_t b);

}  // namespace acsim
