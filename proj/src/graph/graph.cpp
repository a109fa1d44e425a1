#include "acsim/graph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace acsim {

void WeightedGraph::add_edge(NodeId u, NodeId v, Weight w) {
  if (u >= n_ || v >= n_) throw PreconditionError("edge endpoint out of range");
  if (u == v) throw PreconditionError("self-loops are not allowed");
  edges_.push_back({u, v, w});
  adj_out_[u].push_back({v, w});
  if (directed_)
    adj_in_[v].push_back({u, w});
  else
    adj_out_[v].push_back({u, w});
}

uint32_t WeightedGraph::max_degree() const {
  uint32_t d = 0;
  for (NodeId v = 0; v < n_; ++v) d = std::max(d, std::max(out_degree(v), in_degree(v)));
  return d;
}

uint32_t WeightedGraph::avg_degree_k() const {
  if (n_ == 0) return 1;
  return std::max<uint64_t>(1, m() / n_);
}

bool WeightedGraph::connected() const {
  if (n_ == 0) return true;
  std::vector<char> seen(n_, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  uint32_t cnt = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    auto visit = [&](const std::vector<std::pair<NodeId, Weight>>& ns) {
      for (auto& [u, w] : ns)
        if (!seen[u]) {
          seen[u] = 1;
          ++cnt;
          stack.push_back(u);
        }
    };
    visit(out_neighbors(v));
    if (directed_) visit(in_neighbors(v));
  }
  return cnt == n_;
}

void WeightedGraph::validate_weights() const {
  // W polynomial in n: validated <= n^4 with a floor for tiny graphs
  uint64_t cap = std::max<uint64_t>(16, (uint64_t)n_ * n_ * n_ * n_);
  for (auto& e : edges_) {
    if (e.w.is_inf()) continue;
    if (e.w.raw() < 1) throw PreconditionError("finite edge weights must be >= 1");
    if (e.w.raw() > cap) throw PreconditionError("edge weight exceeds n^4 bound");
  }
}

WeightedGraph WeightedGraph::parse(std::istream& in) {
  std::string tok;
  uint32_t n = 0;
  uint64_t m = 0;
  bool directed = false;
  if (!(in >> tok)) throw PreconditionError("empty graph input");
  if (tok == "directed") {
    directed = true;
    in >> n;
  } else {
    n = (uint32_t)std::stoul(tok);
  }
  in >> m;
  WeightedGraph g(n, directed);
  for (uint64_t i = 0; i < m; ++i) {
    uint64_t u, v;
    std::string ws;
    if (!(in >> u >> v >> ws)) throw PreconditionError("truncated edge list");
    Weight w = (ws == "inf") ? kInf : Weight(std::stoull(ws));
    g.add_edge((NodeId)u, (NodeId)v, w);
  }
  g.validate_weights();
  return g;
}

WeightedGraph WeightedGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open graph file: " + path);
  return parse(in);
}

void WeightedGraph::save(std::ostream& out) const {
  if (directed_) out << "directed ";
  out << n_ << " " << edges_.size() << "\n";
  for (auto& e : edges_) out << e.u << " " << e.v << " " << e.w.str() << "\n";
}

}  // namespace acsim
