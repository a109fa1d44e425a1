#include "acsim/ac/primitives.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

namespace acsim {

static uint32_t half_budget(uint32_t c) { return c / 2 ? c / 2 : 1; }

static void collect_inbox(AcCtx& ctx, std::vector<Msg>* out) {
  if (!out) return;
  for (auto& m : ctx.inbox()) out->push_back(m);
}

// ---------------------------------------------------------------------------
// routing

uint64_t route_window_rounds(uint32_t n, uint32_t c, uint64_t k, const Tuning& t) {
  return (uint64_t)t.route_factor * (ceil_div(std::max<uint64_t>(k, 1), c) + 1) * log2_ceil(n);
}

namespace {
struct Scheduled {
  uint64_t slot;
  uint64_t seq;
  Addressed am;
  bool operator<(const Scheduled& o) const { return slot != o.slot ? slot < o.slot : seq < o.seq; }
};
}  // namespace

Proto route_messages(AcCtx& ctx, std::vector<Addressed> msgs, uint64_t k_bound, std::vector<Msg>* out) {
  if (msgs.size() > k_bound) throw PreconditionError("route_messages: node queued more than k messages");
  const uint64_t window = route_window_rounds(ctx.n, ctx.capacity, k_bound, ctx.tuning);
  const uint64_t total = window + ceil_div(k_bound, ctx.capacity) + 1;

  std::vector<Scheduled> sched(msgs.size());
  for (size_t i = 0; i < msgs.size(); ++i) sched[i] = {ctx.rng().uniform(window), i, std::move(msgs[i])};
  std::sort(sched.begin(), sched.end());

  size_t next = 0;
  for (uint64_t r = 0; r < total; ++r) {
    uint32_t budget = ctx.capacity;
    while (next < sched.size() && sched[next].slot <= r && budget) {
      ctx.send(sched[next].am.to, sched[next].am.msg);
      ++next;
      --budget;
    }
    co_await ctx.next_round();
    collect_inbox(ctx, out);
  }
}

uint64_t scatter_window_rounds(uint32_t c, uint64_t per_node_bound, const Tuning& t) {
  return ceil_div(t.scatter_divisor * std::max<uint64_t>(per_node_bound, 1), c);
}

Proto scatter_random(AcCtx& ctx, std::vector<Msg> msgs, uint64_t per_node_bound, std::vector<Msg>* out) {
  if (msgs.size() > per_node_bound) throw PreconditionError("scatter_random: batch exceeds declared bound");
  const uint64_t window = scatter_window_rounds(ctx.capacity, per_node_bound, ctx.tuning);
  const uint64_t total = window + ceil_div(per_node_bound, ctx.capacity) + 1;

  std::vector<Scheduled> sched(msgs.size());
  for (size_t i = 0; i < msgs.size(); ++i) sched[i] = {ctx.rng().uniform(window), i, {Token{}, std::move(msgs[i])}};
  std::sort(sched.begin(), sched.end());

  size_t next = 0;
  for (uint64_t r = 0; r < total; ++r) {
    uint32_t budget = ctx.capacity;
    while (next < sched.size() && sched[next].slot <= r && budget) {
      ctx.send_random(sched[next].am.msg);
      ++next;
      --budget;
    }
    co_await ctx.next_round();
    collect_inbox(ctx, out);
  }
}

// ---------------------------------------------------------------------------
// communication trees (random recruitment; slot = tree index on both sides)

Proto build_communication_trees(AcCtx& ctx, std::vector<NodeId> roots, std::vector<TreeLink>* out) {
  const uint32_t nt = (uint32_t)roots.size();
  const uint32_t L = log2_ceil(ctx.n);
  const uint32_t phases = 2 * L + 8;
  const uint64_t probe_window = std::max<uint64_t>(2, ceil_div((uint64_t)ctx.tuning.scatter_divisor * nt, ctx.capacity));

  out->assign(nt, TreeLink{});
  for (uint32_t t = 0; t < nt; ++t) {
    (*out)[t].my_slot = t;
    (*out)[t].parent_slot = t;
    (*out)[t].child_slot = {t, t};
    if (roots[t] == ctx.id) {
      (*out)[t].member = true;
      (*out)[t].is_root = true;
    }
  }

  std::vector<uint64_t> probe_slot(nt, 0);
  Pacer replies;

  auto handle_inbox = [&](bool accepting) {
    for (auto& m : ctx.inbox()) {
      if (m.tag == tag::kTreeProbe) {
        uint32_t t = (uint32_t)m.word(0);
        TreeLink& lk = (*out)[t];
        if (accepting && !lk.member) {
          lk.member = true;
          lk.parent = m.token(0);
          lk.depth = (uint32_t)m.word(1) + 1;
          replies.enqueue(m.token(0), Msg(tag::kTreeAccept).push(t).push_token(ctx.self));
        } else {
          replies.enqueue(m.token(0), Msg(tag::kTreeReject).push(t));
        }
      } else if (m.tag == tag::kTreeAccept) {
        uint32_t t = (uint32_t)m.word(0);
        TreeLink& lk = (*out)[t];
        if (lk.nchild < 2) lk.children[lk.nchild++] = m.token(0);
      }
    }
  };

  for (uint32_t phase = 0; phase < phases; ++phase) {
    for (uint32_t t = 0; t < nt; ++t) probe_slot[t] = ctx.rng().uniform(probe_window);
    for (uint64_t r = 0; r < probe_window; ++r) {
      handle_inbox(true);
      uint32_t budget = ctx.capacity;
      for (uint32_t t = 0; t < nt && budget; ++t) {
        TreeLink& lk = (*out)[t];
        if (probe_slot[t] == r && lk.member && lk.nchild < 2) {
          ctx.send_random(Msg(tag::kTreeProbe).push(t).push(lk.depth).push_token(ctx.self));
          --budget;
        }
      }
      replies.flush(ctx, budget);
      co_await ctx.next_round();
    }
    for (uint32_t r = 0; r < 2; ++r) {
      handle_inbox(true);
      replies.flush(ctx, ctx.capacity);
      co_await ctx.next_round();
    }
  }
  handle_inbox(false);
  while (!replies.idle()) {
    replies.flush(ctx, ctx.capacity);
    co_await ctx.next_round();
    handle_inbox(false);
  }

  for (uint32_t t = 0; t < nt; ++t) {
    TreeLink& lk = (*out)[t];
    if (!lk.member) throw RetryableError("communication tree " + std::to_string(t) + " left node " +
                                         std::to_string(ctx.id) + " uncovered");
    if (lk.depth > ctx.tuning.c_depth * L * L) throw RetryableError("communication tree exceeded depth bound");
  }
}

// ---------------------------------------------------------------------------
// tree payload wrapping

static Msg wrap_payload(uint32_t msg_tag, uint64_t tree_id, const TreePayload& p) {
  Msg m(msg_tag);
  m.push(tree_id);
  for (uint8_t i = 0; i < p.nw; ++i) m.push(p.w[i]);
  for (uint8_t i = 0; i < p.nt; ++i) m.push_token(p.t[i]);
  return m;
}

static std::pair<uint64_t, TreePayload> unwrap_payload(const Msg& m) {
  TreePayload p;
  for (uint8_t i = 1; i < m.nw; ++i) p.push(m.word(i));
  for (uint8_t i = 0; i < m.nt; ++i) p.push_token(m.token(i));
  return {m.word(0), p};
}

// ---------------------------------------------------------------------------
// multi-tree broadcast / aggregate with receive-slot discipline

uint64_t tree_op_rounds(uint32_t c, uint64_t per_tree_msgs, const TreeBounds& b) {
  uint64_t S = std::max<uint32_t>(b.slot_period, 1);
  uint64_t F = ceil_div(2ull * std::max<uint32_t>(b.max_duties, 1), c) + 1;
  return S * F * (per_tree_msgs + b.depth_bound + 2) + S + 4;
}

Proto multi_tree_broadcast(AcCtx& ctx, std::vector<TreeDuty> duties, TreeBounds bounds,
                           std::vector<std::pair<uint64_t, TreePayload>>* out) {
  const uint64_t S = std::max<uint32_t>(bounds.slot_period, 1);
  const uint64_t total = tree_op_rounds(ctx.capacity, bounds.per_tree_msgs, bounds);

  std::unordered_map<uint64_t, size_t> by_id;
  // per duty, per child: queue cursor into an ordered payload log
  struct DutyState {
    std::vector<TreePayload> log;
    std::array<size_t, 2> sent{0, 0};  // per-child cursor
    std::array<bool, 2> sent_this_period{false, false};
    uint64_t period_mark = 0;
  };
  std::vector<DutyState> st(duties.size());
  for (size_t i = 0; i < duties.size(); ++i) {
    by_id[duties[i].tree_id] = i;
    if (duties[i].link.is_root) st[i].log = duties[i].to_send;
  }

  for (uint64_t r = 0; r < total; ++r) {
    for (auto& m : ctx.inbox()) {
      if (m.tag != tag::kTreeDown) continue;
      auto [tid, p] = unwrap_payload(m);
      auto it = by_id.find(tid);
      if (it == by_id.end()) continue;
      if (out) out->push_back({tid, p});
      st[it->second].log.push_back(p);
    }
    uint32_t budget = ctx.capacity;
    for (size_t i = 0; i < duties.size() && budget; ++i) {
      TreeLink& lk = duties[i].link;
      DutyState& ds = st[i];
      for (uint8_t cix = 0; cix < lk.nchild && budget; ++cix) {
        if (r % S != lk.child_slot[cix] % S) continue;
        // one payload per child per period
        uint64_t period = r / S;
        if (ds.sent[cix] < ds.log.size()) {
          ctx.send(lk.children[cix], wrap_payload(tag::kTreeDown, duties[i].tree_id, ds.log[ds.sent[cix]]));
          ++ds.sent[cix];
          --budget;
        }
        (void)period;
      }
    }
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) {
    if (m.tag != tag::kTreeDown) continue;
    auto [tid, p] = unwrap_payload(m);
    auto it = by_id.find(tid);
    if (it == by_id.end()) continue;
    if (out) out->push_back({tid, p});
    st[it->second].log.push_back(p);
  }
  // every forwarded stream must have drained
  for (size_t i = 0; i < duties.size(); ++i) {
    TreeLink& lk = duties[i].link;
    for (uint8_t cix = 0; cix < lk.nchild; ++cix)
      if (st[i].sent[cix] < st[i].log.size())
        throw std::logic_error("multi_tree_broadcast: round budget too small (payloads still pending)");
  }
}

uint64_t fold_agg(AggFn f, uint64_t a, uint64_t b) {
  switch (f) {
    case AggFn::Min: return std::min(a, b);
    case AggFn::Max: return std::max(a, b);
    case AggFn::Sum: {
      uint64_t s = a + b;
      return s < a ? UINT64_MAX : s;  // saturate
    }
  }
  return a;
}

uint64_t agg_identity(AggFn f) {
  switch (f) {
    case AggFn::Min: return UINT64_MAX;
    case AggFn::Max: return 0;
    case AggFn::Sum: return 0;
  }
  return 0;
}

Proto multi_tree_aggregate(AcCtx& ctx, std::vector<TreeDuty> duties, std::vector<AggFn> fns, TreeBounds bounds,
                           std::vector<std::pair<uint64_t, std::vector<uint64_t>>>* root_out) {
  const uint64_t k = fns.size();
  const uint64_t S = std::max<uint32_t>(bounds.slot_period, 1);
  const uint64_t total = tree_op_rounds(ctx.capacity, k, bounds);

  std::unordered_map<uint64_t, size_t> by_id;
  struct DutyState {
    std::vector<uint64_t> acc;       // own value folded with children's
    std::vector<uint8_t> child_got;  // contributions received per instance
    uint64_t ready = 0;              // instances [0, ready) complete
    uint64_t sent = 0;               // instances [0, sent) shipped to parent
  };
  std::vector<DutyState> st(duties.size());
  for (size_t i = 0; i < duties.size(); ++i) {
    by_id[duties[i].tree_id] = i;
    st[i].acc.assign(k, 0);
    st[i].child_got.assign(k, 0);
    for (uint64_t j = 0; j < k; ++j) {
      st[i].acc[j] = agg_identity(fns[j]);
      if (j < duties[i].to_send.size() && duties[i].to_send[j].nw > 0)
        st[i].acc[j] = fold_agg(fns[j], st[i].acc[j], duties[i].to_send[j].w[0]);
    }
  }

  auto advance_ready = [&](size_t i) {
    uint8_t need = duties[i].link.nchild;
    DutyState& ds = st[i];
    while (ds.ready < k && ds.child_got[ds.ready] >= need) ++ds.ready;
  };
  for (size_t i = 0; i < duties.size(); ++i) advance_ready(i);

  for (uint64_t r = 0; r < total; ++r) {
    for (auto& m : ctx.inbox()) {
      if (m.tag != tag::kTreeUp) continue;
      auto it = by_id.find(m.word(0));
      if (it == by_id.end()) continue;
      uint64_t j = m.word(1);
      if (j < k) {
        st[it->second].acc[j] = fold_agg(fns[j], st[it->second].acc[j], m.word(2));
        ++st[it->second].child_got[j];
        advance_ready(it->second);
      }
    }
    uint32_t budget = ctx.capacity;
    for (size_t i = 0; i < duties.size() && budget; ++i) {
      TreeLink& lk = duties[i].link;
      if (lk.is_root || !lk.member) continue;
      if (r % S != lk.parent_slot % S) continue;
      DutyState& ds = st[i];
      if (ds.sent < ds.ready) {
        ctx.send(lk.parent, Msg(tag::kTreeUp).push(duties[i].tree_id).push(ds.sent).push(ds.acc[ds.sent]));
        ++ds.sent;
        --budget;
      }
    }
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) {
    if (m.tag != tag::kTreeUp) continue;
    auto it = by_id.find(m.word(0));
    if (it == by_id.end()) continue;
    uint64_t j = m.word(1);
    if (j < k) {
      st[it->second].acc[j] = fold_agg(fns[j], st[it->second].acc[j], m.word(2));
      ++st[it->second].child_got[j];
      advance_ready(it->second);
    }
  }
  for (size_t i = 0; i < duties.size(); ++i) {
    if (!duties[i].link.member) continue;
    if (st[i].ready < k || (!duties[i].link.is_root && st[i].sent < k))
      throw std::logic_error("multi_tree_aggregate: round budget too small (instances still pending)");
    if (duties[i].link.is_root && root_out) root_out->push_back({duties[i].tree_id, st[i].acc});
  }
  co_return;
}

// ---------------------------------------------------------------------------
// global commons

Proto build_global_commons(AcCtx& ctx, GlobalCommons* out) {
  std::vector<TreeLink> links;
  co_await build_communication_trees(ctx, {0}, &links);
  out->tree = links[0];
  out->depth_bound = 2 * log2_ceil(ctx.n) + 9;
  std::vector<TreeDuty> duties(1);
  duties[0].tree_id = 0;
  duties[0].link = out->tree;
  if (ctx.id == 0) duties[0].to_send.push_back(TreePayload().push_token(ctx.self));
  std::vector<std::pair<uint64_t, TreePayload>> got;
  co_await multi_tree_broadcast(ctx, std::move(duties), TreeBounds{1, out->depth_bound, 1, 1}, &got);
  if (ctx.id == 0)
    out->root_token = ctx.self;
  else {
    if (got.empty()) throw RetryableError("root token did not reach every node");
    out->root_token = got[0].second.t[0];
  }
}

Proto global_broadcast(AcCtx& ctx, const GlobalCommons& gc, std::vector<TreePayload> mine, uint64_t total,
                       std::vector<TreePayload>* out) {
  std::vector<Addressed> to_root;
  for (auto& p : mine) to_root.push_back({gc.root_token, wrap_payload(tag::kTreeDown, 0, p)});
  std::vector<Msg> at_root;
  co_await route_messages(ctx, std::move(to_root), std::max<uint64_t>(total, 1), &at_root);

  std::vector<TreeDuty> duties(1);
  duties[0].tree_id = 0;
  duties[0].link = gc.tree;
  if (ctx.id == 0) {
    for (auto& m : at_root)
      if (m.tag == tag::kTreeDown) duties[0].to_send.push_back(unwrap_payload(m).second);
    if (duties[0].to_send.size() != total)
      throw RetryableError("global broadcast: root holds " + std::to_string(duties[0].to_send.size()) + " of " +
                           std::to_string(total) + " messages");
    if (out)
      for (auto& p : duties[0].to_send) out->push_back(p);
  }
  std::vector<std::pair<uint64_t, TreePayload>> got;
  co_await multi_tree_broadcast(ctx, std::move(duties), TreeBounds{total, gc.depth_bound, 1, 1}, &got);
  if (out && ctx.id != 0)
    for (auto& [tid, p] : got) out->push_back(p);
}

Proto global_aggregate(AcCtx& ctx, const GlobalCommons& gc, std::vector<uint64_t> values, std::vector<AggFn> fns,
                       std::vector<uint64_t>* out) {
  std::vector<TreeDuty> duties(1);
  duties[0].tree_id = 0;
  duties[0].link = gc.tree;
  for (uint64_t v : values) duties[0].to_send.push_back(TreePayload().push(v));
  std::vector<std::pair<uint64_t, std::vector<uint64_t>>> root_res;
  co_await multi_tree_aggregate(ctx, std::move(duties), fns, TreeBounds{fns.size(), gc.depth_bound, 1, 1}, &root_res);

  std::vector<TreeDuty> down(1);
  down[0].tree_id = 0;
  down[0].link = gc.tree;
  if (ctx.id == 0)
    for (size_t j = 0; j < root_res[0].second.size(); ++j)
      down[0].to_send.push_back(TreePayload().push(j).push(root_res[0].second[j]));
  std::vector<std::pair<uint64_t, TreePayload>> got;
  co_await multi_tree_broadcast(ctx, std::move(down), TreeBounds{fns.size(), gc.depth_bound, 1, 1}, &got);
  if (out) {
    out->assign(fns.size(), 0);
    if (ctx.id == 0)
      *out = root_res[0].second;
    else
      for (auto& [tid, p] : got) (*out)[p.w[0]] = p.w[1];
  }
}

// ---------------------------------------------------------------------------
// grouping

Proto group_nodes(AcCtx& ctx, const GlobalCommons& gc, std::optional<uint32_t> my_part, uint32_t num_parts,
                  uint32_t p_max, NodeGroup* out) {
  out->members.clear();
  out->my_rank = kNoRank;

  // rendezvous nodes are ids [0, num_parts); everyone learns their tokens
  std::vector<TreePayload> mine;
  if (ctx.id < num_parts) mine.push_back(TreePayload().push(ctx.id).push_token(ctx.self));
  std::vector<TreePayload> rdv_raw;
  co_await global_broadcast(ctx, gc, std::move(mine), num_parts, &rdv_raw);
  std::vector<Token> rdv(num_parts);
  for (auto& p : rdv_raw) rdv[p.w[0]] = p.t[0];

  // members report to their rendezvous node
  std::vector<Addressed> join;
  if (my_part) join.push_back({rdv[*my_part], Msg(tag::kGroupJoin).push(*my_part).push(ctx.id).push_token(ctx.self)});
  std::vector<Msg> joined;
  co_await route_messages(ctx, std::move(join), std::max<uint32_t>(p_max, 1), &joined);

  std::vector<std::pair<NodeId, Token>> distr_list;  // as rendezvous node
  for (auto& m : joined)
    if (m.tag == tag::kGroupJoin && m.word(0) == ctx.id) distr_list.push_back({(NodeId)m.word(1), m.token(0)});
  std::sort(distr_list.begin(), distr_list.end());
  const bool is_distr = ctx.id < num_parts && !distr_list.empty();

  // token-list duplication with binary doubling, batch size c: chain position
  // 0 is the rendezvous node, positions 1..s are members in id order; at
  // stage j every informed position r < 2^j ships the list to position r+2^j
  const uint32_t stages = log2_ceil((uint64_t)p_max + 1) + 1;
  const uint64_t stage_rounds = ceil_div(2ull * p_max + 2, half_budget(ctx.capacity)) + 2;

  std::vector<std::pair<NodeId, Token>> member_list;  // as member, once received
  int64_t member_pos = -1;                            // chain position (rank + 1)
  uint32_t expect = UINT32_MAX;
  std::vector<char> got_entry;
  uint32_t got_count = 0;
  const uint32_t my_part_idx = my_part ? *my_part : UINT32_MAX;

  Pacer pacer;
  auto ship_list = [&](const std::vector<std::pair<NodeId, Token>>& list, uint32_t part, const Token& dest) {
    for (uint32_t i = 0; i < list.size(); ++i)
      pacer.enqueue(dest, Msg(tag::kGroupList).push(part).push(i).push(list.size()).push(list[i].first).push_token(
                              list[i].second));
  };

  for (uint32_t stage = 0; stage < stages; ++stage) {
    if (is_distr) {
      uint64_t target = 1ull << stage;  // x_0 -> x_{2^stage}
      if (target <= distr_list.size()) ship_list(distr_list, ctx.id, distr_list[target - 1].second);
    }
    if (member_pos >= 1) {
      uint64_t target = (uint64_t)member_pos + (1ull << stage);
      if ((uint64_t)member_pos < (1ull << stage) && target <= member_list.size())
        ship_list(member_list, my_part_idx, member_list[target - 1].second);
    }
    for (uint64_t r = 0; r < stage_rounds; ++r) {
      for (auto& m : ctx.inbox()) {
        if (m.tag != tag::kGroupList || m.word(0) != my_part_idx) continue;
        if (expect == UINT32_MAX) {
          expect = (uint32_t)m.word(2);
          member_list.assign(expect, {kNoNode, Token{}});
          got_entry.assign(expect, 0);
        }
        uint32_t idx = (uint32_t)m.word(1);
        if (!got_entry[idx]) {
          got_entry[idx] = 1;
          ++got_count;
          member_list[idx] = {(NodeId)m.word(3), m.token(0)};
        }
      }
      if (member_pos == -1 && expect != UINT32_MAX && got_count == expect) {
        for (uint32_t i = 0; i < member_list.size(); ++i)
          if (member_list[i].first == ctx.id) member_pos = i + 1;
      }
      pacer.flush(ctx, half_budget(ctx.capacity));
      co_await ctx.next_round();
    }
  }
  while (!pacer.idle()) {
    pacer.flush(ctx, ctx.capacity);
    co_await ctx.next_round();
  }

  if (my_part) {
    if (member_pos < 1) throw RetryableError("grouping: member never received its token list");
    out->members = member_list;
    out->my_rank = (uint32_t)(member_pos - 1);
  }
}

// ---------------------------------------------------------------------------
// local group trees (in-order = id order)

namespace {
struct Shape {
  uint32_t parent = kNoRank;
  uint32_t left = kNoRank, right = kNoRank;
  uint32_t depth = 0;
};

Shape group_shape(uint32_t size, uint32_t me, uint32_t forced_root) {
  Shape s;
  uint32_t lo = 0, hi = size, parent = kNoRank, depth = 0;
  while (true) {
    uint32_t root = (forced_root != kNoRank && lo == 0 && hi == size) ? forced_root : lo + (hi - lo) / 2;
    if (root == me) {
      s.parent = parent;
      s.depth = depth;
      if (root > lo) s.left = lo + (root - lo) / 2;
      if (root + 1 < hi) s.right = root + 1 + (hi - root - 1) / 2;
      return s;
    }
    parent = root;
    ++depth;
    if (me < root)
      hi = root;
    else
      lo = root + 1;
  }
}
}  // namespace

TreeLink group_tree_link(const NodeGroup& g, uint32_t root_rank) {
  TreeLink lk;
  if (!g.in_group()) return lk;
  Shape s = group_shape(g.size(), g.my_rank, root_rank);
  lk.member = true;
  lk.is_root = s.parent == kNoRank;
  lk.depth = s.depth;
  if (!lk.is_root) lk.parent = g.members[s.parent].second;
  if (s.left != kNoRank) {
    lk.child_slot[lk.nchild] = 0;
    lk.children[lk.nchild++] = g.members[s.left].second;
  }
  if (s.right != kNoRank) {
    lk.child_slot[lk.nchild] = 0;
    lk.children[lk.nchild++] = g.members[s.right].second;
  }
  return lk;
}

uint32_t group_tree_depth_bound(uint32_t size) { return 2 * log2_ceil(std::max<uint32_t>(size, 2)) + 2; }

Proto group_broadcast(AcCtx& ctx, const NodeGroup& g, uint32_t root_rank, std::vector<TreePayload> mine,
                      uint64_t per_group_msgs, uint32_t p_max, std::vector<TreePayload>* out) {
  std::vector<TreeDuty> duties;
  if (g.in_group()) {
    TreeDuty d;
    d.tree_id = g.leader();
    d.link = group_tree_link(g, root_rank);
    if (g.my_rank == root_rank) {
      d.to_send = std::move(mine);
      if (out)
        for (auto& p : d.to_send) out->push_back(p);
    }
    duties.push_back(std::move(d));
  }
  std::vector<std::pair<uint64_t, TreePayload>> got;
  co_await multi_tree_broadcast(ctx, std::move(duties), TreeBounds{per_group_msgs, group_tree_depth_bound(p_max), 1, 1},
                                &got);
  if (out && g.in_group() && g.my_rank != root_rank)
    for (auto& [tid, p] : got) out->push_back(p);
}

Proto group_aggregate(AcCtx& ctx, const NodeGroup& g, uint32_t root_rank, std::vector<uint64_t> values,
                      const std::vector<AggFn>& fns, uint64_t k_bound, uint32_t p_max,
                      std::vector<uint64_t>* root_out) {
  std::vector<TreeDuty> duties;
  if (g.in_group()) {
    TreeDuty d;
    d.tree_id = g.leader();
    d.link = group_tree_link(g, root_rank);
    for (uint64_t v : values) d.to_send.push_back(TreePayload().push(v));
    duties.push_back(std::move(d));
  }
  std::vector<std::pair<uint64_t, std::vector<uint64_t>>> res;
  co_await multi_tree_aggregate(ctx, std::move(duties), fns, TreeBounds{k_bound, group_tree_depth_bound(p_max), 1, 1},
                                &res);
  if (root_out && !res.empty()) *root_out = res[0].second;
}

// ---------------------------------------------------------------------------
// group prefix sums

Proto group_prefix_sums(AcCtx& ctx, const NodeGroup& g, std::vector<uint64_t> values, uint64_t k_bound, uint32_t p_max,
                        std::vector<uint64_t>* out) {
  const uint64_t k = k_bound;
  const uint32_t D = group_tree_depth_bound(p_max);
  const uint32_t hb = half_budget(ctx.capacity);
  const uint64_t up_rounds = (k + D + 3) * ceil_div(2ull, hb);
  const uint64_t down_rounds = (k + D + 3) * ceil_div(2ull, hb) + ceil_div(k, hb) + 2;

  Shape sh;
  Token partok, lefttok, righttok;
  bool have_left = false, have_right = false;
  if (g.in_group()) {
    sh = group_shape(g.size(), g.my_rank, kNoRank);
    if (sh.parent != kNoRank) partok = g.members[sh.parent].second;
    if (sh.left != kNoRank) {
      lefttok = g.members[sh.left].second;
      have_left = true;
    }
    if (sh.right != kNoRank) {
      righttok = g.members[sh.right].second;
      have_right = true;
    }
  }
  values.resize(k, 0);
  std::vector<uint64_t> left_sum(k, 0), right_sum(k, 0);
  std::vector<char> left_seen(k, !have_left), right_seen(k, !have_right);

  // up sweep: subtree sums, readiness-driven
  uint64_t up_sent = 0;
  auto up_ready = [&](uint64_t j) { return left_seen[j] && right_seen[j]; };
  for (uint64_t r = 0; r < up_rounds; ++r) {
    for (auto& m : ctx.inbox()) {
      if (m.tag != tag::kPrefixUp) continue;
      uint64_t j = m.word(0);
      if (m.word(1))
        right_sum[j] = m.word(2), right_seen[j] = 1;
      else
        left_sum[j] = m.word(2), left_seen[j] = 1;
    }
    if (g.in_group() && sh.parent != kNoRank) {
      uint32_t budget = hb;
      while (budget && up_sent < k && up_ready(up_sent)) {
        uint64_t subtree = left_sum[up_sent] + values[up_sent] + right_sum[up_sent];
        ctx.send(partok, Msg(tag::kPrefixUp).push(up_sent).push(g.my_rank > sh.parent ? 1 : 0).push(subtree));
        ++up_sent;
        --budget;
      }
    }
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) {
    if (m.tag != tag::kPrefixUp) continue;
    uint64_t j = m.word(0);
    if (m.word(1))
      right_sum[j] = m.word(2), right_seen[j] = 1;
    else
      left_sum[j] = m.word(2), left_seen[j] = 1;
  }
  if (g.in_group() && sh.parent != kNoRank && up_sent < k)
    throw std::logic_error("group_prefix_sums: up sweep incomplete");

  // down sweep: offsets
  if (out) out->assign(k, 0);
  std::vector<uint64_t> offset(k, 0);
  std::vector<char> offset_seen(k, 0);
  bool is_root = g.in_group() && sh.parent == kNoRank;
  if (is_root) std::fill(offset_seen.begin(), offset_seen.end(), 1);
  uint64_t down_sent = 0;

  for (uint64_t r = 0; r < down_rounds; ++r) {
    for (auto& m : ctx.inbox()) {
      if (m.tag != tag::kPrefixDown) continue;
      offset[m.word(0)] = m.word(1);
      offset_seen[m.word(0)] = 1;
    }
    if (g.in_group()) {
      uint32_t budget = hb;
      while (budget >= 2 && down_sent < k && offset_seen[down_sent]) {
        uint64_t j = down_sent;
        uint64_t prev = offset[j] + left_sum[j];
        if (out) (*out)[j] = prev;
        if (have_left) ctx.send(lefttok, Msg(tag::kPrefixDown).push(j).push(offset[j]));
        if (have_right) ctx.send(righttok, Msg(tag::kPrefixDown).push(j).push(prev + values[j]));
        ++down_sent;
        budget -= 2;
      }
    }
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) {
    if (m.tag != tag::kPrefixDown) continue;
    offset[m.word(0)] = m.word(1);
    offset_seen[m.word(0)] = 1;
  }
  // leaves may finish computing prev from the last delivery
  if (g.in_group())
    while (down_sent < k && offset_seen[down_sent]) {
      if (out) (*out)[down_sent] = offset[down_sent] + left_sum[down_sent];
      ++down_sent;
    }
  if (g.in_group() && down_sent < k) throw std::logic_error("group_prefix_sums: down sweep incomplete");
}

// ---------------------------------------------------------------------------
// group multicast

Proto group_multicast(AcCtx& ctx, const NodeGroup& g, MulticastDemand demand, uint64_t k_bound, uint64_t m_bound,
                      uint32_t p_max, std::vector<std::pair<uint32_t, TreePayload>>* out) {
  if (demand.msgs.size() > k_bound || demand.target_ranks.size() > m_bound)
    throw PreconditionError("group_multicast: demand exceeds declared bounds");

  const uint32_t hb = half_budget(ctx.capacity);
  const uint64_t m_v = demand.target_ranks.size();

  std::vector<uint64_t> prev;
  co_await group_prefix_sums(ctx, g, {m_v}, 1, p_max, &prev);
  const uint64_t s_i = g.in_group() ? prev[0] : 0;
  if (g.in_group() && s_i + m_v > g.size())
    throw PreconditionError("group_multicast: total multicast targets exceed group size");

  // headers straight to the gateways: (sender rank, k, gw index, target, m)
  Pacer pacer;
  if (g.in_group())
    for (uint64_t j = 0; j < m_v; ++j)
      pacer.enqueue(g.members[s_i + j].second, Msg(tag::kMcHeader)
                                                   .push(g.my_rank)
                                                   .push(demand.msgs.size())
                                                   .push(j)
                                                   .push(demand.target_ranks[j])
                                                   .push(m_v));
  const uint64_t hdr_rounds = ceil_div(std::max<uint64_t>(m_bound, 1), hb) + 2;
  uint32_t sender_rank = kNoRank;
  uint64_t sender_k = 0, sender_m = 0, my_gw_index = 0;
  uint32_t my_target_rank = kNoRank;
  auto take_header = [&](const Msg& m) {
    if (m.tag != tag::kMcHeader) return;
    if (sender_rank != kNoRank) throw PreconditionError("group_multicast: node is gateway of two senders");
    sender_rank = (uint32_t)m.word(0);
    sender_k = m.word(1);
    my_gw_index = m.word(2);
    my_target_rank = (uint32_t)m.word(3);
    sender_m = m.word(4);
  };
  for (uint64_t r = 0; r < hdr_rounds; ++r) {
    for (auto& m : ctx.inbox()) take_header(m);
    pacer.flush(ctx, hb);
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) take_header(m);

  // data diffusion: the sender feeds gateway 0; at stage j >= 1 every gateway
  // with index < 2^(j-1) that already holds the data forwards to index+2^(j-1)
  const uint32_t stages = log2_ceil(std::max<uint64_t>(m_bound, 1)) + 1;
  const uint64_t stage_rounds = ceil_div(std::max<uint64_t>(k_bound, 1), hb) + 2;
  std::vector<TreePayload> gw_data(sender_rank != kNoRank ? sender_k : 0);
  std::vector<char> gw_got(gw_data.size(), 0);
  uint64_t gw_have = 0;

  auto ship_data = [&](const Token& dest, const std::vector<TreePayload>& src, uint32_t srank) {
    for (uint64_t j = 0; j < src.size(); ++j) {
      Msg m = wrap_payload(tag::kMcData, srank, src[j]);
      m.push(j);  // sequence number rides as the last word
      pacer.enqueue(dest, m);
    }
  };

  for (uint32_t stage = 0; stage < stages; ++stage) {
    if (stage == 0) {
      if (g.in_group() && m_v > 0 && !demand.msgs.empty()) ship_data(g.members[s_i].second, demand.msgs, g.my_rank);
    } else if (sender_rank != kNoRank && gw_have == sender_k && sender_k > 0) {
      uint64_t half = 1ull << (stage - 1);
      if (my_gw_index < half && my_gw_index + half < sender_m) {
        uint64_t sender_s = g.my_rank - my_gw_index;
        ship_data(g.members[sender_s + my_gw_index + half].second, gw_data, sender_rank);
      }
    }
    for (uint64_t r = 0; r < stage_rounds; ++r) {
      for (auto& m : ctx.inbox()) {
        if (m.tag != tag::kMcData) continue;
        auto [srank, p] = unwrap_payload(m);
        if ((uint32_t)srank != sender_rank) continue;
        uint64_t seq = p.w[p.nw - 1];
        if (seq < gw_data.size() && !gw_got[seq]) {
          gw_got[seq] = 1;
          ++gw_have;
          gw_data[seq] = p;
          --gw_data[seq].nw;
        }
      }
      pacer.flush(ctx, hb);
      co_await ctx.next_round();
    }
  }

  // gateways forward to their targets
  if (sender_rank != kNoRank && my_target_rank != kNoRank && gw_have == sender_k)
    for (uint64_t j = 0; j < gw_data.size(); ++j)
      pacer.enqueue(g.members[my_target_rank].second, wrap_payload(tag::kMcTarget, sender_rank, gw_data[j]));
  if (sender_rank != kNoRank && gw_have < sender_k)
    throw std::logic_error("group_multicast: gateway missed data");

  const uint64_t final_rounds = ceil_div(std::max<uint64_t>(k_bound, 1), hb) + 2;
  auto take_out = [&](const Msg& m) {
    if (m.tag != tag::kMcTarget) return;
    auto [srank, p] = unwrap_payload(m);
    if (out) out->push_back({(uint32_t)srank, p});
  };
  for (uint64_t r = 0; r < final_rounds; ++r) {
    for (auto& m : ctx.inbox()) take_out(m);
    pacer.flush(ctx, hb);
    co_await ctx.next_round();
  }
  for (auto& m : ctx.inbox()) take_out(m);
}

}  // namespace acsim
