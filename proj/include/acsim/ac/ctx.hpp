#pragma once

#include <span>
#include <vector>

#include "acsim/ac/fiber.hpp"
#include "acsim/ac/msg.hpp"
#include "acsim/common.hpp"
#include "acsim/tuning.hpp"

namespace acsim {

// Per-node view of the AC(c) model, implemented by the direct kernel and by
// the model-mapping hosts (Hybrid skeleton simulation). A program addresses
// a message either to a learned communication token or to a uniformly
// random node; it never sees sender identities.
class AcCtx {
 public:
  virtual ~AcCtx() = default;

  NodeId id = 0;
  uint32_t n = 0;
  uint32_t capacity = 1;
  Token self;
  Tuning tuning;

  // initial knowledge handed to the program (e.g. neighbor tokens)
  std::span<const std::pair<NodeId, Token>> granted;

  virtual void send(const Token& to, const Msg& m) = 0;
  virtual void send_random(const Msg& m) = 0;
  virtual std::span<const Msg> inbox() const = 0;
  virtual Rng& rng() = 0;

  // lockstep self-check; hosts may verify all live nodes post equal tags
  virtual void checkpoint(uint64_t) {}

  virtual void park(std::coroutine_handle<> h) = 0;
  NextRound next_round() { return NextRound{this}; }
};

inline void NextRound::await_suspend(std::coroutine_handle<Proto::promise_type> h) noexcept {
  h.promise().ctx->park(h);
}

// Silently consume `rounds` barriers (lockstep idling).
Proto idle_rounds(AcCtx& ctx, uint64_t rounds);

using NodeProgram = std::function<Proto(AcCtx&)>;

}  // namespace acsim
