#pragma once

#include <cstdint>
#include <vector>

#include "acsim/ac/primitives.hpp"
#include "acsim/graph/minplus.hpp"
#include "acsim/graph/weight.hpp"

namespace acsim {

enum class Dir : uint8_t { Out = 0, In = 1 };
inline Dir flip(Dir d) { return d == Dir::Out ? Dir::In : Dir::Out; }

// One carried edge: weight, direction context (the duty), endpoint tokens and
// the token of the mirror carrier holding the opposite-direction copy.
struct EdgeRec {
  NodeId from = 0, to = 0;
  Weight w = kInf;
  Token tok_from, tok_to;
  Token mirror;
  bool has_mirror = false;
};

// Owner's view of one of its carriers.
struct CarrierInfo {
  NodeId id = 0;
  Token tok;
  uint32_t lo = 0, hi = 0;  // interval [lo, hi) of opposite-endpoint ids
  uint32_t slot = 0;        // carrier's receive slot for this tree
};

struct OwnerSide {
  std::vector<CarrierInfo> carriers;
  uint32_t root_slot = 0;  // owner's own receive slot for this tree
  uint32_t deg = 0;        // number of stored edges in this direction
};

// A shard this node carries for (owner, dir).
struct CarrierDuty {
  NodeId owner = kNoNode;
  Token owner_tok;
  Dir dir = Dir::Out;
  uint32_t duty_index = 0;  // position in the owner's carrier list
  uint32_t lo = 0, hi = 0;
  uint32_t my_slot = 0;
  TreeLink link;  // tree over {owner} U C_owner^dir, heap-shaped
  std::vector<EdgeRec> edges;
};

struct CarrierNodeState {
  OwnerSide side[2];  // indexed by Dir
  std::vector<CarrierDuty> duties;

  // globally agreed quantities (identical on every node)
  uint32_t n = 0;
  uint32_t k = 1;             // average-degree parameter
  uint32_t delta_out = 0;     // max out-degree over nodes
  uint32_t delta_in = 0;
  uint32_t max_carriers = 1;  // max |C_v^dir|
  uint32_t max_duties = 1;    // max duties held by any node
  uint32_t slot_period = 1;   // >= any node's duties + 2 root roles
  bool symmetric = false;     // undirected graph stored both ways

  uint32_t next_slot = 0;  // local slot allocator

  OwnerSide& owner(Dir d) { return side[(int)d]; }
  const OwnerSide& owner(Dir d) const { return side[(int)d]; }
};

// The distributed structure as a whole (indexed by node id); what one
// protocol run hands to the next.
struct CarrierConfig {
  std::vector<CarrierNodeState> nodes;
  bool partial = false;  // out sets only

  uint32_t n() const { return nodes.empty() ? 0 : nodes[0].n; }
  uint32_t k() const { return nodes.empty() ? 1 : nodes[0].k; }

  // materializes the stored matrix from the out shards (oracle/test helper)
  MinPlusMatrix to_matrix() const;
  // token grants implied by the state, for seeding a follow-up protocol run
  TokenGrants grants() const;
};

struct PartialCarrierConfig : CarrierConfig {};

}  // namespace acsim
