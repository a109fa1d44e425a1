#pragma once

#include <cstdint>

namespace acsim {

// Every polylog factor hidden in an Õ(.) bound is pinned here as an explicit
// constant; tests assert against these, never against asymptotics.
struct Tuning {
  // communication-tree depth bound: depth <= c_depth * log2(n)^2
  uint32_t c_depth = 2;

  // retry budget for whp failures at small n
  uint32_t retry_budget = 3;

  // routing window: rounds = route_factor * (k/c + 1) * log2(n)
  uint32_t route_factor = 2;

  // random-destination scatter: a batch of b messages per node is spread over
  // ceil(scatter_divisor * b / c) rounds so receive tails stay below c
  uint32_t scatter_divisor = 48;

  // carrier configurations: membership bound zeta * log2(n)
  uint32_t zeta = 4;

  // hitting-set sampling rate C_s * log2(n) / sqrt(n), capped at 1
  uint32_t c_sample = 3;

  // hopset construction: source-detection hop depth ceil(hopset_d_num / eps)
  // and number of add-and-recompute iterations
  uint32_t hopset_d_num = 4;
  uint32_t hopset_iters = 2;

  // exact SSSP: Bellman-Ford iteration count ceil(bf_factor * n / k')
  uint32_t bf_factor = 4;

  // skeleton graphs: h = c_h * n^(1-x) * log2(n), helpers-per-node bound
  // c_help * log2(n)
  uint32_t c_h = 2;
  uint32_t c_help = 2;

  // hybrid global channel: per-round total global sends throttled to
  // n / global_divisor so gamma audits hold at desk scale
  uint32_t global_divisor = 16;
};

}  // namespace acsim
