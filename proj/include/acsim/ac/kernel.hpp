#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "acsim/ac/ctx.hpp"
#include "acsim/ac/trace.hpp"
#include "acsim/tuning.hpp"

namespace acsim {

enum class OverflowPolicy : uint8_t { FailFast, DropWithReport };
enum class TraceMode : uint8_t { Auto, Full, Summary };

struct ProtocolConfig {
  uint32_t capacity = 4;
  uint64_t seed = 1;
  OverflowPolicy overflow = OverflowPolicy::FailFast;
  uint64_t round_limit = 30'000'000;
  TraceMode trace_mode = TraceMode::Auto;
  Tuning tuning;

  void validate() const {
    if (capacity < 1) throw PreconditionError("capacity c must be >= 1");
  }
};

class CapacityError : public RetryableError {
 public:
  CapacityError(const CapacityViolation& v, std::string what) : RetryableError(std::move(what)), violation(v) {}
  CapacityViolation violation;
};

// Stable communication tokens for one experiment: the same (seed, n) always
// yields the same table, so tokens embedded in state built by an earlier
// protocol run stay valid in later runs.
class TokenTable {
 public:
  TokenTable() = default;
  TokenTable(uint64_t seed, uint32_t n);

  const Token& of(NodeId v) const { return tokens_[v]; }
  NodeId lookup(const Token& t) const {
    auto it = by_token_.find(t);
    return it == by_token_.end() ? kNoNode : it->second;
  }
  uint32_t n() const { return (uint32_t)tokens_.size(); }

 private:
  std::vector<Token> tokens_;
  std::unordered_map<Token, NodeId, TokenHash> by_token_;
};

// Initial knowledge: tokens (with their node ids where meaningful) granted
// to each node before round 0.
using TokenGrants = std::vector<std::vector<std::pair<NodeId, Token>>>;

struct RunResult {
  RoundTrace trace;
};

// Observer invoked after each executed round with the per-sender lists of
// destination node ids (emission order); used by the CONGEST accounting layer.
using RoundObserver = std::function<void(uint64_t, const std::vector<std::vector<NodeId>>&)>;

// Executes a node program on n nodes under the AC(c) contract: per round
// each node sends and receives at most c messages, addressed by learned
// token or to a uniformly random node. Deterministic given (inputs,
// program, seed).
RunResult run_ac(const ProtocolConfig& cfg, uint32_t n, const std::function<Proto(AcCtx&)>& program,
                 const TokenGrants* grants = nullptr, const TokenTable* tokens = nullptr,
                 const RoundObserver* round_observer = nullptr);

// Retries fn (a whole protocol execution) on RetryableError with derived
// seeds, up to cfg.tuning.retry_budget extra attempts. Returns the number of
// retries consumed.
uint32_t run_with_retries(const ProtocolConfig& cfg, const std::function<void(const ProtocolConfig&)>& fn);

}  // namespace acsim
