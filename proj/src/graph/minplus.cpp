#include "acsim/graph/minplus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace acsim {

MinPlusMatrix MinPlusMatrix::identity(uint32_t n) {
  MinPlusMatrix m(n);
  for (NodeId i = 0; i < n; ++i) m.set(i, i, Weight::zero());
  return m;
}

MinPlusMatrix MinPlusMatrix::adjacency(const WeightedGraph& g, bool with_self_loops) {
  MinPlusMatrix m(g.n());
  for (NodeId v = 0; v < g.n(); ++v) {
    if (with_self_loops) m.set(v, v, Weight::zero());
    for (auto& [u, w] : g.out_neighbors(v)) m.set_min(v, u, w);
  }
  return m;
}

MinPlusMatrix MinPlusMatrix::parse(std::istream& in) {
  uint32_t n;
  if (!(in >> n)) throw PreconditionError("empty matrix input");
  MinPlusMatrix m(n);
  uint64_t r, c;
  std::string ws;
  while (in >> r >> c >> ws) {
    Weight w = (ws == "inf") ? kInf : Weight(std::stoull(ws));
    if (r >= n || c >= n) throw PreconditionError("matrix index out of range");
    m.set_min((NodeId)r, (NodeId)c, w);
  }
  return m;
}

void MinPlusMatrix::save(std::ostream& out) const {
  out << n_ << "\n";
  for (NodeId r = 0; r < n_; ++r)
    for (auto& [c, w] : rows_[r]) out << r << " " << c << " " << w.str() << "\n";
}

MinPlusMatrix minplus_product_oracle(const MinPlusMatrix& S, const MinPlusMatrix& T) {
  if (S.n() != T.n()) throw PreconditionError("minplus product: dimension mismatch");
  MinPlusMatrix P(S.n());
  for (NodeId i = 0; i < S.n(); ++i)
    for (auto& [k, sw] : S.row(i))
      for (auto& [j, tw] : T.row(k)) P.set_min(i, j, sw + tw);
  return P;
}

MinPlusMatrix k_smallest_row_filter(const MinPlusMatrix& m, uint32_t k) {
  MinPlusMatrix out(m.n());
  std::vector<std::pair<Weight, NodeId>> vals;
  for (NodeId r = 0; r < m.n(); ++r) {
    vals.clear();
    for (auto& [c, w] : m.row(r)) vals.push_back({w, c});
    if (vals.size() > k) {
      std::nth_element(vals.begin(), vals.begin() + k, vals.end());
      vals.resize(k);
    }
    for (auto& [w, c] : vals) out.set(r, c, w);
  }
  return out;
}

}  // namespace acsim
