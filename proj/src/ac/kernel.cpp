#include "acsim/ac/kernel.hpp"

#include <algorithm>
#include <cassert>

namespace acsim {

TokenTable::TokenTable(uint64_t seed, uint32_t n) {
  tokens_.resize(n);
  by_token_.reserve(n * 2);
  Rng rng = derive_rng(seed, kDomainTokens, 0);
  for (NodeId v = 0; v < n; ++v) {
    Token t;
    do {
      t.hi = rng.next();
      t.lo = rng.next();
    } while (!t.valid() || by_token_.count(t));
    tokens_[v] = t;
    by_token_[t] = v;
  }
}

namespace {

struct OutMsg {
  NodeId to;
  Msg msg;
  bool random;
};

struct NodeRt final : AcCtx {
  std::coroutine_handle<> parked;
  bool done = false;
  Proto* proto = nullptr;
  Rng prog_rng;
  std::vector<Msg> in_cur, in_next;
  std::vector<OutMsg> out;
  uint32_t sent_this_round = 0, random_this_round = 0;
  std::unordered_set<Token, TokenHash> learned;

  const TokenTable* table = nullptr;
  const ProtocolConfig* cfg = nullptr;
  uint64_t* round = nullptr;
  std::vector<CapacityViolation>* violations = nullptr;
  bool* has_checkpoint = nullptr;
  uint64_t* checkpoint_tag = nullptr;
  NodeId* checkpoint_node = nullptr;

  void send(const Token& to, const Msg& m) override {
    NodeId dest = table->lookup(to);
    if (dest == kNoNode) throw PreconditionError("node " + std::to_string(id) + " used a forged communication token");
    if (!learned.count(to))
      throw PreconditionError("node " + std::to_string(id) + " addressed a token it never learned");
    record_send(dest, m, false);
  }

  void send_random(const Msg& m) override {
    NodeId dest = (NodeId)prog_rng.uniform(n);
    record_send(dest, m, true);
    ++random_this_round;
  }

  void record_send(NodeId dest, const Msg& m, bool random) {
    ++sent_this_round;
    if (sent_this_round > capacity) {
      CapacityViolation v{id, *round, Direction::Send, sent_this_round};
      if (cfg->overflow == OverflowPolicy::FailFast)
        throw CapacityError(v, "send capacity exceeded at node " + std::to_string(id) + ", round " +
                                   std::to_string(*round) + " (send)");
      violations->push_back(v);
      return;  // dropped
    }
    out.push_back({dest, m, random});
  }

  std::span<const Msg> inbox() const override { return in_cur; }
  Rng& rng() override { return prog_rng; }
  void park(std::coroutine_handle<> h) override { parked = h; }

  void checkpoint(uint64_t tag) override {
    if (*has_checkpoint) {
      if (*checkpoint_tag != tag)
        throw std::logic_error("protocol desync: node " + std::to_string(id) + " checkpoint " + std::to_string(tag) +
                               " vs node " + std::to_string(*checkpoint_node) + " checkpoint " +
                               std::to_string(*checkpoint_tag) + " at round " + std::to_string(*round));
    } else {
      *has_checkpoint = true;
      *checkpoint_tag = tag;
      *checkpoint_node = id;
    }
  }
};

}  // namespace

Proto idle_rounds(AcCtx& ctx, uint64_t rounds) {
  for (uint64_t i = 0; i < rounds; ++i) co_await ctx.next_round();
}

RunResult run_ac(const ProtocolConfig& cfg, uint32_t n, const std::function<Proto(AcCtx&)>& program,
                 const TokenGrants* grants, const TokenTable* tokens, const RoundObserver* round_observer) {
  cfg.validate();
  if (n < 1) throw PreconditionError("n must be >= 1");

  TokenTable local_table;
  if (!tokens) {
    local_table = TokenTable(cfg.seed, n);
    tokens = &local_table;
  }

  RunResult res;
  RoundTrace& trace = res.trace;
  trace.init(n, cfg.trace_mode != TraceMode::Summary);

  uint64_t round = 0;
  bool has_checkpoint = false;
  uint64_t checkpoint_tag = 0;
  NodeId checkpoint_node = 0;

  std::vector<NodeRt> rts(n);
  std::vector<Proto> protos;
  protos.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    NodeRt& rt = rts[v];
    rt.id = v;
    rt.n = n;
    rt.capacity = cfg.capacity;
    rt.self = tokens->of(v);
    rt.tuning = cfg.tuning;
    rt.prog_rng = derive_rng(cfg.seed, kDomainProgram, v);
    rt.table = tokens;
    rt.cfg = &cfg;
    rt.round = &round;
    rt.violations = &trace.violations;
    rt.has_checkpoint = &has_checkpoint;
    rt.checkpoint_tag = &checkpoint_tag;
    rt.checkpoint_node = &checkpoint_node;
    rt.learned.insert(rt.self);
    if (grants) {
      rt.granted = std::span<const std::pair<NodeId, Token>>((*grants)[v]);
      for (auto& [gid, gt] : (*grants)[v]) rt.learned.insert(gt);
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    protos.push_back(program(rts[v]));
    protos[v].h.promise().ctx = &rts[v];
    protos[v].h.promise().done_flag = &rts[v].done;
  }

  std::vector<std::vector<NodeId>> observed;
  const uint64_t full_trace_budget = 1ull << 22;

  while (true) {
    if (round >= cfg.round_limit)
      throw TimeoutError("round limit " + std::to_string(cfg.round_limit) + " exceeded");
    has_checkpoint = false;

    bool any_live = false;
    for (NodeId v = 0; v < n; ++v) {
      NodeRt& rt = rts[v];
      if (rt.done) continue;
      any_live = true;
      std::coroutine_handle<> h = rt.parked ? rt.parked : std::coroutine_handle<>(protos[v].h);
      rt.parked = {};
      h.resume();
      if (protos[v].h.promise().exc) std::rethrow_exception(protos[v].h.promise().exc);
    }

    bool any_msgs = false;
    for (auto& rt : rts)
      if (!rt.out.empty()) {
        any_msgs = true;
        break;
      }
    if (!any_live || (!any_msgs && std::all_of(rts.begin(), rts.end(), [](const NodeRt& r) { return r.done; })))
      break;

    if (round_observer) {
      observed.assign(n, {});
      for (NodeId v = 0; v < n; ++v)
        for (auto& om : rts[v].out) observed[v].push_back(om.to);
    }

    // deterministic merge: recipients collect in (sender id, emission index) order
    for (NodeId v = 0; v < n; ++v) {
      NodeRt& rt = rts[v];
      for (auto& om : rt.out) rts[om.to].in_next.push_back(om.msg);
    }

    bool row_kept = trace.full && (round + 1) * (uint64_t)n <= full_trace_budget;
    if (trace.full && !row_kept) {
      trace.full = false;
      trace.rows.clear();
      trace.rows.shrink_to_fit();
    }
    if (row_kept) trace.rows.emplace_back(n);

    for (NodeId v = 0; v < n; ++v) {
      NodeRt& rt = rts[v];
      uint32_t recv = (uint32_t)rt.in_next.size();
      if (recv > cfg.capacity) {
        CapacityViolation viol{v, round, Direction::Receive, recv};
        if (cfg.overflow == OverflowPolicy::FailFast)
          throw CapacityError(viol, "receive capacity exceeded at node " + std::to_string(v) + ", round " +
                                        std::to_string(round) + " (receive)");
        trace.violations.push_back(viol);
        rt.in_next.resize(cfg.capacity);
        recv = cfg.capacity;
      }
      for (auto& m : rt.in_next)
        for (uint8_t i = 0; i < m.nt; ++i) rt.learned.insert(m.t[i]);

      trace.total_sent += rt.sent_this_round;
      trace.total_received += recv;
      trace.total_random += rt.random_this_round;
      trace.max_sent[v] = std::max(trace.max_sent[v], rt.sent_this_round);
      trace.max_received[v] = std::max(trace.max_received[v], recv);
      if (row_kept) trace.rows.back()[v] = {rt.sent_this_round, recv, rt.random_this_round};

      rt.in_cur.swap(rt.in_next);
      rt.in_next.clear();
      rt.out.clear();
      rt.sent_this_round = 0;
      rt.random_this_round = 0;
    }

    if (round_observer) (*round_observer)(round, observed);
    ++round;
    trace.total_rounds = round;
  }

  return res;
}

uint32_t run_with_retries(const ProtocolConfig& cfg, const std::function<void(const ProtocolConfig&)>& fn) {
  ProtocolConfig attempt_cfg = cfg;
  for (uint32_t attempt = 0;; ++attempt) {
    try {
      fn(attempt_cfg);
      return attempt;
    } catch (const RetryableError&) {
      if (attempt >= cfg.tuning.retry_budget) throw;
      attempt_cfg.seed = hash_combine(cfg.seed, 0xA77E0000ull + attempt);
    }
  }
}

}  // namespace acsim
