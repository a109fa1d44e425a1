#pragma once

#include <map>
#include <vector>

#include "acsim/common.hpp"
#include "acsim/graph/graph.hpp"
#include "acsim/graph/weight.hpp"

namespace acsim {

// Sparse square matrix over (min,+). Absent entries are INF; stored entries
// are finite. Rows are ordered maps for deterministic iteration.
class MinPlusMatrix {
 public:
  MinPlusMatrix() = default;
  explicit MinPlusMatrix(uint32_t n) : n_(n), rows_(n) {}

  uint32_t n() const { return n_; }

  void set(NodeId r, NodeId c, Weight w) {
    if (w.is_inf())
      rows_[r].erase(c);
    else
      rows_[r][c] = w;
  }

  void set_min(NodeId r, NodeId c, Weight w) {
    if (w.is_inf()) return;
    auto [it, fresh] = rows_[r].emplace(c, w);
    if (!fresh) it->second = min(it->second, w);
  }

  Weight at(NodeId r, NodeId c) const {
    auto it = rows_[r].find(c);
    return it == rows_[r].end() ? kInf : it->second;
  }

  const std::map<NodeId, Weight>& row(NodeId r) const { return rows_[r]; }

  uint64_t nnz() const {
    uint64_t s = 0;
    for (auto& r : rows_) s += r.size();
    return s;
  }

  uint32_t max_row_size() const {
    uint32_t s = 0;
    for (auto& r : rows_) s = std::max<uint32_t>(s, (uint32_t)r.size());
    return s;
  }

  bool operator==(const MinPlusMatrix& o) const { return n_ == o.n_ && rows_ == o.rows_; }

  static MinPlusMatrix identity(uint32_t n);
  static MinPlusMatrix adjacency(const WeightedGraph& g, bool with_self_loops);

  static MinPlusMatrix parse(std::istream& in);  // "n" header then "row col value" triplets
  void save(std::ostream& out) const;

 private:
  uint32_t n_ = 0;
  std::vector<std::map<NodeId, Weight>> rows_;
};

// Dense reference for P = S*T over (min,+): P[i][j] = min_k S[i][k]+T[k][j].
MinPlusMatrix minplus_product_oracle(const MinPlusMatrix& S, const MinPlusMatrix& T);

// Keeps in each row the k smallest finite values, ties broken by
// (value, column) lexicographic order for determinism. Tests compare value
// multisets only since tie choice is unconstrained.
MinPlusMatrix k_smallest_row_filter(const MinPlusMatrix& m, uint32_t k);

}  // namespace acsim
