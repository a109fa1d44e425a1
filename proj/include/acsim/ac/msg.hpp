#pragma once

#include <array>
#include <cstdint>

#include "acsim/common.hpp"
#include "acsim/graph/weight.hpp"

namespace acsim {

// Opaque per-node communication secret: two words drawn from seeded
// randomness. Knowing a token is the capability to message its node.
struct Token {
  uint64_t hi = 0, lo = 0;

  constexpr bool valid() const { return hi != 0 || lo != 0; }
  constexpr auto operator<=>(const Token&) const = default;
};

struct TokenHash {
  size_t operator()(const Token& t) const { return hash_combine(t.hi, t.lo); }
};

// An O(log n)-bit message: a tag plus a constant number of words, with
// tokens carried as typed fields so the kernel can track which tokens a
// recipient has learned.
struct Msg {
  static constexpr uint32_t kMaxWords = 6;
  static constexpr uint32_t kMaxTokens = 3;

  uint32_t tag = 0;
  uint8_t nw = 0, nt = 0;
  std::array<uint64_t, kMaxWords> w{};
  std::array<Token, kMaxTokens> t{};

  Msg() = default;
  explicit Msg(uint32_t tag_) : tag(tag_) {}

  Msg& push(uint64_t word) {
    if (nw >= kMaxWords) throw PreconditionError("message exceeds its constant word budget");
    w[nw++] = word;
    return *this;
  }
  Msg& push_weight(Weight x) { return push(x.raw()); }
  Msg& push_token(const Token& tok) {
    if (nt >= kMaxTokens) throw PreconditionError("message exceeds its token budget");
    t[nt++] = tok;
    return *this;
  }

  uint64_t word(uint32_t i) const { return w[i]; }
  Weight weight(uint32_t i) const { return Weight(w[i]); }
  const Token& token(uint32_t i) const { return t[i]; }
};

// A message queued for a concrete recipient token.
struct Addressed {
  Token to;
  Msg msg;
};

}  // namespace acsim
