#pragma once

#include <functional>
#include <optional>

#include "acsim/carrier/types.hpp"
#include "acsim/graph/graph.hpp"

namespace acsim {

// ---------------------------------------------------------------------------
// Node-program building blocks. Each takes the per-node slice of a
// CarrierConfig; globally agreed bounds live inside the state. All of them
// are collective: every node calls them together.

// Degrees-only allocation: carrier sets + communication trees, no data.
// deg_out/deg_in are this node's row/column finite counts of the matrix to
// be stored. Satisfies the allocation and tree properties.
Proto init_carriers_node(AcCtx& ctx, const GlobalCommons& gc, uint32_t deg_out, uint32_t deg_in, bool symmetric,
                         CarrierNodeState* st);

// Data population: this node knows its incident edges (with neighbor
// tokens); intervals are computed by the owner and shards shipped out, then
// mirror links are resolved. rows[i] = (to, weight, token of `to`).
struct LocalEdge {
  NodeId other = 0;
  Weight w = kInf;
  Token other_tok;
};
Proto populate_carriers_node(AcCtx& ctx, std::vector<LocalEdge> out_edges, std::vector<LocalEdge> in_edges,
                             CarrierNodeState* st);

// init + populate for a classical graph input.
Proto build_config_node(AcCtx& ctx, const GlobalCommons& gc, std::vector<LocalEdge> out_edges,
                        std::vector<LocalEdge> in_edges, bool symmetric, CarrierNodeState* st);

// Per-owner broadcast of up to c messages to both carrier sets, and c
// aggregation tasks over them, all owners in parallel.
Proto carrier_broadcast_node(AcCtx& ctx, const CarrierNodeState& st, std::vector<TreePayload> msgs,
                             std::vector<std::pair<uint64_t, TreePayload>>* received);
Proto carrier_aggregate_node(AcCtx& ctx, const CarrierNodeState& st, Dir dir,
                             const std::vector<AggFn>& fns,  // instance list
                             const std::function<std::vector<uint64_t>(const CarrierDuty&)>& duty_values,
                             std::vector<uint64_t>* owner_out);

// Owner learns its stored edges in one direction; optionally filtered by a
// predicate evaluable from the stored record (known to owner and carriers).
using EdgePredicate = std::function<bool(const EdgeRec&)>;
Proto learn_carried_node(AcCtx& ctx, const CarrierNodeState& st, Dir dir, uint64_t delta_bound,
                         const EdgePredicate& pred, uint64_t pred_bound, std::vector<EdgeRec>* out);

// Point-wise minimum of two stored matrices; produces a fresh configuration.
Proto merge_min_node(AcCtx& ctx, const GlobalCommons& gc, const CarrierNodeState& a, const CarrierNodeState& b,
                     CarrierNodeState* out);

// Transpose completion: input holds only out shards (each node its own row
// when duty-less); allocates and populates the in sides without owners ever
// holding their in-edges.
Proto complete_partial_node(AcCtx& ctx, const GlobalCommons& gc, const CarrierNodeState& partial,
                            CarrierNodeState* out);

// ---------------------------------------------------------------------------
// Whole-structure operations (kernel runs around the node programs).

struct CarrierBuildResult {
  CarrierConfig config;
  RoundTrace trace;
  uint32_t retries = 0;
};

// Builds a carrier configuration of g (undirected graphs stored in both
// directions). Runs under the given protocol config; retries on whp misses.
CarrierBuildResult build_carrier_config(const WeightedGraph& g, const ProtocolConfig& cfg);

// Builds a configuration holding an explicit (directed) min-plus matrix,
// k parameter chosen as max(1, floor(nnz/n)).
CarrierBuildResult build_matrix_config(const MinPlusMatrix& m, const ProtocolConfig& cfg);

struct LearnResult {
  std::vector<std::vector<EdgeRec>> per_node;
  RoundTrace trace;
};
LearnResult learn_carried(const CarrierConfig& cc, Dir dir, const ProtocolConfig& cfg);
LearnResult learn_carried_predicate(const CarrierConfig& cc, Dir dir,
                                    const std::function<bool(NodeId, const EdgeRec&)>& pred, uint64_t pred_bound,
                                    const ProtocolConfig& cfg);

CarrierBuildResult merge_min(const CarrierConfig& a, const CarrierConfig& b, const ProtocolConfig& cfg);

CarrierBuildResult complete_partial(const CarrierConfig& partial, const ProtocolConfig& cfg);

// Builds the partial configuration where each node carries its own row.
CarrierConfig self_partial_config(const MinPlusMatrix& rows, const TokenTable& tokens, bool symmetric);

// Transpose view: swaps in/out roles (a carrier configuration implicitly
// holds the transpose).
CarrierConfig transpose_view(const CarrierConfig& cc);

}  // namespace acsim
