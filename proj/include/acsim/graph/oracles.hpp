#pragma once

#include <optional>
#include <vector>

#include "acsim/graph/graph.hpp"

namespace acsim {

struct DistanceVector {
  NodeId source = 0;
  std::vector<Weight> d;
  std::optional<uint32_t> hop_bound;

  bool operator==(const DistanceVector& o) const { return source == o.source && d == o.d; }
};

// Sequential reference oracle for d_G. Errors on out-of-range source or
// (structurally) disconnected input.
DistanceVector dijkstra_oracle(const WeightedGraph& g, NodeId s);

// d^h(s, .): lightest path using at most h hops, INF where none exists.
DistanceVector bounded_hop_distance(const WeightedGraph& g, NodeId s, uint32_t h);

// Same as bounded_hop_distance but over an explicit min-plus matrix viewed
// as a directed graph (used to verify hopset unions).
DistanceVector bounded_hop_distance(const MinPlusMatrix& a, NodeId s, uint32_t h);

// Weighted diameter via Dijkstra from every node.
Weight diameter_oracle(const WeightedGraph& g);

}  // namespace acsim
