#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "acsim/ac/ctx.hpp"
#include "acsim/ac/kernel.hpp"

namespace acsim {

// control tags used by the toolbox; callers own the rest of the tag space
namespace tag {
constexpr uint32_t kTreeProbe = 0xA001;
constexpr uint32_t kTreeAccept = 0xA002;
constexpr uint32_t kTreeReject = 0xA003;
constexpr uint32_t kTreeDown = 0xA004;   // wrapped payload moving towards leaves
constexpr uint32_t kTreeUp = 0xA005;     // aggregation value moving towards root
constexpr uint32_t kGroupJoin = 0xA006;  // member -> rendezvous node
constexpr uint32_t kGroupList = 0xA007;  // token-list entry during duplication
constexpr uint32_t kPrefixUp = 0xA008;
constexpr uint32_t kPrefixDown = 0xA009;
constexpr uint32_t kMcHeader = 0xA00A;  // (s_i, m_i) chain
constexpr uint32_t kMcData = 0xA00B;    // multicast payload to/between gateways
constexpr uint32_t kMcTarget = 0xA00C;  // j-th gateway's target assignment
constexpr uint32_t kRootToken = 0xA00D;
}  // namespace tag

// Drains queued token-addressed sends at a fixed per-round budget.
class Pacer {
 public:
  void enqueue(const Token& to, const Msg& m) { q_.push_back({to, m}); }
  void flush(AcCtx& ctx, uint32_t budget) {
    while (budget-- && !q_.empty()) {
      ctx.send(q_.front().to, q_.front().msg);
      q_.pop_front();
    }
  }
  bool idle() const { return q_.empty(); }
  size_t pending() const { return q_.size(); }

 private:
  std::deque<Addressed> q_;
};

// ---------------------------------------------------------------------------
// Load-balanced point-to-point routing. Each node sends at most k messages to
// known recipient tokens and receives at most k; k is globally known. Every
// message is scheduled into a uniformly random slot of a window of
// route_factor*(ceil(k/c)+1)*log2(n) rounds, which keeps per-round loads
// below c with high probability at desk scale.
// All nodes must call this together; delivered messages are appended to out.
Proto route_messages(AcCtx& ctx, std::vector<Addressed> msgs, uint64_t k_bound, std::vector<Msg>* out);

uint64_t route_window_rounds(uint32_t n, uint32_t c, uint64_t k, const Tuning& t);

// Spreads random-destination messages thinly enough that receive tails stay
// below c. per_node_bound is a globally known bound on batch size.
Proto scatter_random(AcCtx& ctx, std::vector<Msg> msgs, uint64_t per_node_bound, std::vector<Msg>* out);

uint64_t scatter_window_rounds(uint32_t c, uint64_t per_node_bound, const Tuning& t);

// ---------------------------------------------------------------------------
// Communication trees (random recruitment, <=2 children, depth O(log n)).

struct TreeLink {
  bool member = false;
  bool is_root = false;
  Token parent;
  std::array<Token, 2> children{};
  uint8_t nchild = 0;
  uint32_t depth = 0;  // levels from root (root = 0)

  // Receive slots: every node assigns each tree it serves a distinct slot in
  // [0, slot_period); traffic towards a node on a tree only moves in rounds
  // congruent to that slot, which caps per-round tree inbound at 2 by
  // construction. Both tree sides learn each other's slot at link setup.
  uint32_t my_slot = 0;
  uint32_t parent_slot = 0;
  std::array<uint32_t, 2> child_slot{};
};

// Builds one communication tree per root in `roots` (ids globally known),
// each spanning [n]. Per-tree links land in out[t]. Throws RetryableError if
// some node stays uncovered within the phase budget.
Proto build_communication_trees(AcCtx& ctx, std::vector<NodeId> roots, std::vector<TreeLink>* out);

// ---------------------------------------------------------------------------
// Payload forwarded along trees: one message worth of user data plus the
// multiplexing tree id.
struct TreePayload {
  uint8_t nw = 0, nt = 0;
  std::array<uint64_t, 4> w{};
  std::array<Token, 2> t{};

  TreePayload() = default;
  TreePayload& push(uint64_t x) {
    w[nw++] = x;
    return *this;
  }
  TreePayload& push_token(const Token& tok) {
    t[nt++] = tok;
    return *this;
  }
};

struct TreeDuty {
  uint64_t tree_id = 0;
  TreeLink link;
  // broadcast: payloads originated here (root only); aggregate: local values
  std::vector<TreePayload> to_send;
};

struct TreeBounds {
  uint64_t per_tree_msgs = 0;  // max payloads per tree
  uint32_t depth_bound = 0;
  uint32_t max_duties = 1;   // max trees any single node serves
  uint32_t slot_period = 1;  // >= max_duties; receive-slot arithmetic modulus
};

// Broadcast root payloads down every duty tree in parallel; every member's
// received payloads (with tree ids) are appended to out. Requires c >= 2
// when any node serves more than one tree.
Proto multi_tree_broadcast(AcCtx& ctx, std::vector<TreeDuty> duties, TreeBounds bounds,
                           std::vector<std::pair<uint64_t, TreePayload>>* out);

uint64_t tree_op_rounds(uint32_t c, uint64_t per_tree_msgs, const TreeBounds& b);

enum class AggFn : uint8_t { Min, Max, Sum };

uint64_t fold_agg(AggFn f, uint64_t a, uint64_t b);
uint64_t agg_identity(AggFn f);

// k aggregation instances per tree flow to the root; instance i of duty d is
// folded with fns[i]. duties[i].to_send payloads carry the local values
// (word 0 of payload j = instance j value). Roots receive totals in out.
Proto multi_tree_aggregate(AcCtx& ctx, std::vector<TreeDuty> duties, std::vector<AggFn> fns, TreeBounds bounds,
                           std::vector<std::pair<uint64_t, std::vector<uint64_t>>>* root_out);

// ---------------------------------------------------------------------------
// Global commons: one tree rooted at node 0 whose token is known to all;
// built once per protocol and reused by broadcast/aggregate.
struct GlobalCommons {
  TreeLink tree;
  Token root_token;
  uint32_t depth_bound = 0;
};

Proto build_global_commons(AcCtx& ctx, GlobalCommons* out);

// Broadcast a set of messages (held anywhere) to all nodes. total is the
// globally known |M|; received payloads appended to out on every node.
Proto global_broadcast(AcCtx& ctx, const GlobalCommons& gc, std::vector<TreePayload> mine, uint64_t total,
                       std::vector<TreePayload>* out);

// c parallel aggregation problems in O~(1) rounds; results known to all.
Proto global_aggregate(AcCtx& ctx, const GlobalCommons& gc, std::vector<uint64_t> values, std::vector<AggFn> fns,
                       std::vector<uint64_t>* out);

// ---------------------------------------------------------------------------
// Grouping: disjoint parts V_1..V_k, every member ends up knowing the full
// (id, token) list of its part.

constexpr uint32_t kNoRank = UINT32_MAX;

struct NodeGroup {
  std::vector<std::pair<NodeId, Token>> members;  // sorted by id
  uint32_t my_rank = kNoRank;

  bool in_group() const { return my_rank != kNoRank; }
  uint32_t size() const { return (uint32_t)members.size(); }
  NodeId leader() const { return members.front().first; }  // lowest id
};

// my_part: part index in [k], or nullopt when not in any part. num_parts and
// p_max (max part size) are globally known.
Proto group_nodes(AcCtx& ctx, const GlobalCommons& gc, std::optional<uint32_t> my_part, uint32_t num_parts,
                  uint32_t p_max, NodeGroup* out);

// Locally computed balanced tree over a group whose in-order traversal is the
// id order, rooted at root_rank. No communication.
TreeLink group_tree_link(const NodeGroup& g, uint32_t root_rank);
uint32_t group_tree_depth_bound(uint32_t size);

// Broadcast from group member root_rank to the whole group / aggregate k
// instances at root_rank, touching only the group's bandwidth. Nodes outside
// any group pass an empty NodeGroup and idle in lockstep.
Proto group_broadcast(AcCtx& ctx, const NodeGroup& g, uint32_t root_rank, std::vector<TreePayload> mine,
                      uint64_t per_group_msgs, uint32_t p_max, std::vector<TreePayload>* out);

Proto group_aggregate(AcCtx& ctx, const NodeGroup& g, uint32_t root_rank, std::vector<uint64_t> values,
                      const std::vector<AggFn>& fns, uint64_t k_bound, uint32_t p_max, std::vector<uint64_t>* root_out);

// prev(v) = sum of values of members preceding v in id order; k instances.
Proto group_prefix_sums(AcCtx& ctx, const NodeGroup& g, std::vector<uint64_t> values, uint64_t k_bound, uint32_t p_max,
                        std::vector<uint64_t>* out);

// Group multicast: each sender ships its k messages to m_v distinct targets
// in the group; every member is the target of at most one sender. Gateway
// assignment is derived from group prefix sums.
struct MulticastDemand {
  std::vector<TreePayload> msgs;      // at most k_bound
  std::vector<uint32_t> target_ranks;  // distinct ranks in the group
};

Proto group_multicast(AcCtx& ctx, const NodeGroup& g, MulticastDemand demand, uint64_t k_bound, uint64_t m_bound,
                      uint32_t p_max, std::vector<std::pair<uint32_t, TreePayload>>* out);  // (sender rank, payload)

}  // namespace acsim
