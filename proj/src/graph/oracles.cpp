#include "acsim/graph/oracles.hpp"

#include <queue>

#include "acsim/graph/minplus.hpp"

namespace acsim {

DistanceVector dijkstra_oracle(const WeightedGraph& g, NodeId s) {
  if (s >= g.n()) throw PreconditionError("dijkstra: source out of range");
  if (!g.connected()) throw PreconditionError("dijkstra: graph is disconnected");
  DistanceVector dv;
  dv.source = s;
  dv.d.assign(g.n(), kInf);
  dv.d[s] = Weight::zero();
  using QE = std::pair<uint64_t, NodeId>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  pq.push({0, s});
  std::vector<char> done(g.n(), 0);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (auto& [v, w] : g.out_neighbors(u)) {
      Weight nd = dv.d[u] + w;
      if (nd < dv.d[v]) {
        dv.d[v] = nd;
        pq.push({nd.raw(), v});
      }
    }
  }
  return dv;
}

static DistanceVector bounded_hop_bf(uint32_t n, NodeId s, uint32_t h,
                                     const std::function<void(const std::vector<Weight>&, std::vector<Weight>&)>& relax) {
  DistanceVector dv;
  dv.source = s;
  dv.hop_bound = h;
  dv.d.assign(n, kInf);
  dv.d[s] = Weight::zero();
  std::vector<Weight> next;
  for (uint32_t i = 0; i < h; ++i) {
    next = dv.d;
    relax(dv.d, next);
    if (next == dv.d) break;
    dv.d.swap(next);
  }
  return dv;
}

DistanceVector bounded_hop_distance(const WeightedGraph& g, NodeId s, uint32_t h) {
  if (s >= g.n()) throw PreconditionError("bounded_hop: source out of range");
  return bounded_hop_bf(g.n(), s, h, [&](const std::vector<Weight>& cur, std::vector<Weight>& next) {
    for (NodeId u = 0; u < g.n(); ++u) {
      if (cur[u].is_inf()) continue;
      for (auto& [v, w] : g.out_neighbors(u)) next[v] = min(next[v], cur[u] + w);
    }
  });
}

DistanceVector bounded_hop_distance(const MinPlusMatrix& a, NodeId s, uint32_t h) {
  if (s >= a.n()) throw PreconditionError("bounded_hop: source out of range");
  return bounded_hop_bf(a.n(), s, h, [&](const std::vector<Weight>& cur, std::vector<Weight>& next) {
    for (NodeId u = 0; u < a.n(); ++u) {
      if (cur[u].is_inf()) continue;
      for (auto& [v, w] : a.row(u)) next[v] = min(next[v], cur[u] + w);
    }
  });
}

Weight diameter_oracle(const WeightedGraph& g) {
  Weight d = Weight::zero();
  for (NodeId s = 0; s < g.n(); ++s) {
    auto dv = dijkstra_oracle(g, s);
    for (auto w : dv.d)
      if (w.is_finite() && w > d) d = w;
  }
  return d;
}

}  // namespace acsim
