#include "acsim/ac/trace.hpp"

#include <ostream>
#include <sstream>

namespace acsim {

void RoundTrace::export_csv(std::ostream& out) const {
  out << "round,node,sent,received,random_sent\n";
  if (full) {
    for (uint64_t r = 0; r < rows.size(); ++r)
      for (NodeId v = 0; v < n; ++v) {
        auto& row = rows[r][v];
        out << r << "," << v << "," << row.sent << "," << row.received << "," << row.random_sent << "\n";
      }
  } else {
    // summary mode: one row per node with per-round maxima, round = -1
    for (NodeId v = 0; v < n; ++v)
      out << -1 << "," << v << "," << max_sent[v] << "," << max_received[v] << "," << 0 << "\n";
  }
}

std::string AuditReport::str() const {
  if (pass) return "capacity audit: pass";
  std::ostringstream os;
  os << "capacity audit: " << violations.size() << " violation(s)";
  for (auto& v : violations)
    os << "\n  node " << v.node << " round " << v.round << " "
       << (v.dir == Direction::Send ? "sent" : "received") << " " << v.count;
  return os.str();
}

AuditReport capacity_audit(const RoundTrace& trace, uint32_t c) {
  AuditReport rep;
  rep.violations = trace.violations;  // drops recorded by the kernel
  if (trace.full) {
    for (uint64_t r = 0; r < trace.rows.size(); ++r)
      for (NodeId v = 0; v < trace.n; ++v) {
        auto& row = trace.rows[r][v];
        if (row.sent > c) rep.violations.push_back({v, r, Direction::Send, row.sent});
        if (row.received > c) rep.violations.push_back({v, r, Direction::Receive, row.received});
      }
  } else {
    for (NodeId v = 0; v < trace.n; ++v) {
      if (trace.max_sent[v] > c) rep.violations.push_back({v, 0, Direction::Send, trace.max_sent[v]});
      if (trace.max_received[v] > c) rep.violations.push_back({v, 0, Direction::Receive, trace.max_received[v]});
    }
  }
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace acsim
