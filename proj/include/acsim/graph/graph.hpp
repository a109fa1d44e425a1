#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "acsim/common.hpp"
#include "acsim/graph/weight.hpp"

namespace acsim {

struct Edge {
  NodeId u = 0, v = 0;
  Weight w = kInf;
};

// Node-indexed weighted (di)graph. Undirected graphs store each edge once
// and expose both directions through the adjacency lists. Finite edge
// weights are in {1..W} with W validated <= n^4 at load.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(uint32_t n, bool directed) : n_(n), directed_(directed), adj_out_(n), adj_in_(n) {}

  uint32_t n() const { return n_; }
  uint64_t m() const { return edges_.size(); }
  bool directed() const { return directed_; }

  void add_edge(NodeId u, NodeId v, Weight w);

  const std::vector<Edge>& edges() const { return edges_; }

  // (neighbor, weight) pairs; for undirected graphs out == in.
  const std::vector<std::pair<NodeId, Weight>>& out_neighbors(NodeId v) const { return adj_out_[v]; }
  const std::vector<std::pair<NodeId, Weight>>& in_neighbors(NodeId v) const {
    return directed_ ? adj_in_[v] : adj_out_[v];
  }

  uint32_t out_degree(NodeId v) const { return (uint32_t)adj_out_[v].size(); }
  uint32_t in_degree(NodeId v) const { return directed_ ? (uint32_t)adj_in_[v].size() : (uint32_t)adj_out_[v].size(); }
  uint32_t degree(NodeId v) const { return out_degree(v); }

  uint32_t max_degree() const;
  // average degree used by carrier configurations: max(1, floor(m/n))
  uint32_t avg_degree_k() const;

  bool connected() const;  // treats INF edges as usable links (structure only)

  // W bound check: every finite edge weight must be in {1..n^4}.
  void validate_weights() const;

  static WeightedGraph parse(std::istream& in);
  static WeightedGraph load(const std::string& path);
  void save(std::ostream& out) const;

 private:
  uint32_t n_ = 0;
  bool directed_ = false;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<NodeId, Weight>>> adj_out_;
  std::vector<std::vector<std::pair<NodeId, Weight>>> adj_in_;
};

}  // namespace acsim
