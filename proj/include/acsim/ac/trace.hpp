#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "acsim/common.hpp"

namespace acsim {

enum class Direction : uint8_t { Send, Receive };

struct CapacityViolation {
  NodeId node = 0;
  uint64_t round = 0;
  Direction dir = Direction::Send;
  uint32_t count = 0;
};

// Per-round send/receive ledger. Full per-round rows are kept only when the
// run is small enough (or forced); aggregate maxima are always kept so audits
// work on long runs too.
struct RoundTrace {
  struct Row {
    uint32_t sent = 0, received = 0, random_sent = 0;
  };

  uint64_t total_rounds = 0;
  uint32_t n = 0;
  uint64_t total_sent = 0, total_received = 0, total_random = 0;
  std::vector<uint32_t> max_sent;      // per node, over all rounds
  std::vector<uint32_t> max_received;  // per node
  bool full = true;
  std::vector<std::vector<Row>> rows;  // [round][node], only when full
  std::vector<CapacityViolation> violations;
  uint32_t retries = 0;

  void init(uint32_t n_nodes, bool keep_full) {
    n = n_nodes;
    full = keep_full;
    max_sent.assign(n, 0);
    max_received.assign(n, 0);
  }

  void export_csv(std::ostream& out) const;  // round,node,sent,received,random_sent
};

struct AuditReport {
  bool pass = true;
  std::vector<CapacityViolation> violations;
  std::string str() const;
};

// Validates the model contract: sent <= c and received <= c for every node
// in every round of the trace.
AuditReport capacity_audit(const RoundTrace& trace, uint32_t c);

}  // namespace acsim
