#include "acsim/ac/kwise.hpp"

namespace acsim {

// Irreducible polynomials over GF(2): x^w + (terms encoded in the mask).
// Standard minimal-weight table for w = 1..64.
static const uint64_t kIrreducible[65] = {
    0,
    0x1,  0x3,  0x3,  0x3,  0x5,  0x3,  0x3,  0x1b,
    0x3,  0x9,  0x5,  0x9,  0x1b, 0x21, 0x3,  0x2b,
    0x9,  0x9,  0x27, 0x9,  0x5,  0x3,  0x21, 0x1b,
    0x9,  0x1b, 0x27, 0x3,  0x5,  0x3,  0x9,  0x8d,
    0x4b, 0x1b, 0x5,  0x35, 0x3f, 0x63, 0x11, 0x39,
    0x9,  0x27, 0x59, 0x21, 0x1b, 0x3,  0x21, 0x2d,
    0x71, 0x1d, 0x4b, 0x9,  0x47, 0x7d, 0x47, 0x95,
    0x11, 0x63, 0x7b, 0x3,  0x27, 0x69, 0x3,  0x1b,
};

KwiseHash::KwiseHash(const std::vector<uint64_t>& seed_bits, uint32_t seed_bit_len, uint32_t k, uint32_t a,
                     uint32_t b) {
  if (k < 1 || a < 1 || b < 1 || a > 64 || b > 64) throw PreconditionError("kwise hash: bad parameters");
  k_ = k;
  a_ = a;
  b_ = b;
  w_ = a > b ? a : b;
  red_ = kIrreducible[w_];
  uint32_t need = seed_bits_needed(k, a, b);
  if (seed_bit_len < need) throw PreconditionError("kwise hash: seed too short");
  if (seed_bits.size() * 64 < need) throw PreconditionError("kwise hash: seed words missing");
  coeff_.resize(k);
  uint64_t mask = (w_ == 64) ? ~0ull : ((1ull << w_) - 1);
  for (uint32_t i = 0; i < k; ++i) {
    // extract w_ bits starting at bit i*w_
    uint64_t bitpos = (uint64_t)i * w_;
    uint64_t word = bitpos / 64, off = bitpos % 64;
    uint64_t v = seed_bits[word] >> off;
    if (off && word + 1 < seed_bits.size()) v |= seed_bits[word + 1] << (64 - off);
    coeff_[i] = v & mask;
  }
}

// carry-less multiplication reduced mod the field polynomial
static uint64_t gf_mul(uint64_t x, uint64_t y, uint32_t w, uint64_t red) {
  uint64_t hi_bit = 1ull << (w - 1);
  uint64_t mask = (w == 64) ? ~0ull : ((1ull << w) - 1);
  uint64_t acc = 0;
  while (y) {
    if (y & 1) acc ^= x;
    y >>= 1;
    bool carry = x & hi_bit;
    x = (x << 1) & mask;
    if (carry) x ^= red;
  }
  return acc & mask;
}

uint64_t KwiseHash::operator()(uint64_t key) const {
  uint64_t mask = (w_ == 64) ? ~0ull : ((1ull << w_) - 1);
  uint64_t x = key & mask;
  uint64_t acc = 0;
  for (uint32_t i = k_; i-- > 0;) acc = gf_mul(acc, x, w_, red_) ^ coeff_[i];  // Horner
  uint64_t bmask = (b_ == 64) ? ~0ull : ((1ull << b_) - 1);
  return acc & bmask;
}

std::vector<uint64_t> sample_hash_seed(Rng& rng, uint32_t k, uint32_t a, uint32_t b) {
  uint32_t bits = KwiseHash::seed_bits_needed(k, a, b);
  std::vector<uint64_t> words((bits + 63) / 64);
  for (auto& w : words) w = rng.next();
  // zero the unused tail so the seed is exactly k*max(a,b) bits
  uint32_t tail = bits % 64;
  if (tail) words.back() &= (1ull << tail) - 1;
  return words;
}

}  // namespace acsim
