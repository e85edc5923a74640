#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "selinv/common.hpp"
#include "selinv/symbolic.hpp"

namespace selinv {

/// Virtual 2D processor grid. Ranks are labeled 1..pr*pc externally and
/// 0..pr*pc-1 internally.
struct ProcGrid {
  int pr = 1;
  int pc = 1;

  int size() const { return pr * pc; }
  // 0-based block indices and rank
  int owner0(index_t bi, index_t bj) const {
    return static_cast<int>(bi % pr) * pc + static_cast<int>(bj % pc);
  }
};

/// 1-based owner rank of block (I, J):  mod(I-1,Pr)*Pc + mod(J-1,Pc) + 1.
inline int owner(index_t i1, index_t j1, const ProcGrid& g) {
  return static_cast<int>((i1 - 1) % g.pr) * g.pc + static_cast<int>((j1 - 1) % g.pc) + 1;
}

/// Broadcast/reduction spanning tree over a rank subset. The non-root
/// participants are rotated by a seeded offset, then a complete binary tree is
/// laid over [root, rotated...] by position: children of position i sit at
/// 2i+1 and 2i+2. In star mode every non-root hangs directly off the root.
struct CommTree {
  int root = -1;
  std::vector<int> order;  // order[0] == root
  std::size_t shift = 0;
  bool star = false;

  int size() const { return static_cast<int>(order.size()); }
  int parent_pos(int pos) const { return star ? 0 : (pos - 1) / 2; }
  std::vector<int> children_pos(int pos) const;
  int depth() const;       // edges on the longest root-to-leaf path
  int max_fanout() const;
  bool spans(const std::vector<int>& participants) const;
};

/// participants must be sorted ascending and contain root.
CommTree build_comm_tree(int root, const std::vector<int>& participants,
                         std::uint64_t seed, bool star = false);

enum class CollectiveKind { BcastL = 0, BcastU, ReduceL, ReduceU, ReduceD };
constexpr int kCollectiveKinds = 5;

/// One delivered message (or, for src == dst, a local compute step).
struct SimEvent {
  std::uint64_t tick;  // destination clock after delivery
  int src;
  int dst;
  std::uint64_t tag;   // packs kind, supernode, line within the collective
  std::uint64_t bytes;

  bool operator==(const SimEvent&) const = default;
};

std::uint64_t make_tag(CollectiveKind k, index_t snode, index_t line);

struct SimStats {
  int nranks = 0;
  std::vector<std::uint64_t> msgs_sent, msgs_recv, bytes_sent, bytes_recv;
  std::vector<std::uint64_t> events_per_snode;
  std::array<std::uint64_t, kCollectiveKinds> msgs_by_kind{};
  std::uint64_t total_messages = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t critical_path = 0;  // latest event tick
  // max per-rank send count within one collective, split by group size
  std::uint64_t max_sends_per_collective = 0;
  std::uint64_t max_sends_group_gt3 = 0;
};

/// Exact aggregation of an event log.
SimStats comm_stats(const std::vector<SimEvent>& log, int nranks, index_t n_snodes);

void stats_csv(const SimStats& s, std::ostream& out);

/// Deterministic discrete-event engine: per-rank clocks, messages cost one
/// send tick plus one delivery tick, local computation one tick.
class SimEngine {
 public:
  SimEngine(int nranks, index_t n_snodes);

  void message(int src, int dst, std::uint64_t bytes, CollectiveKind k, index_t snode,
               index_t line);
  void compute(int rank, CollectiveKind k, index_t snode);

  /// Timing of a broadcast along the tree edges, parents before children.
  void broadcast(const CommTree& t, std::uint64_t bytes, CollectiveKind k, index_t snode);
  /// Timing of a reduction along the tree edges, deepest positions first; each
  /// arrival is followed by one combine tick at the parent.
  void reduce(const CommTree& t, std::uint64_t bytes, CollectiveKind k, index_t snode);

  const std::vector<SimEvent>& log() const { return log_; }
  std::uint64_t clock(int rank) const { return clock_[rank]; }
  SimStats stats() const;

 private:
  void track_collective(const std::vector<std::uint64_t>& sends, int group);

  int nranks_;
  index_t n_snodes_;
  std::vector<std::uint64_t> clock_;
  std::vector<SimEvent> log_;
  std::uint64_t max_sends_per_collective_ = 0;
  std::uint64_t max_sends_group_gt3_ = 0;
};

/// Per-supernode priority numbers: the root gets 1, each level below adds 1.
/// Lower number means higher priority.
struct TaskPriority {
  std::vector<index_t> sigma;
};

TaskPriority schedule_priorities(const EliminationTree& et);

/// Execution order: ascending priority; ties broken by descending supernode
/// index, or by a seeded shuffle within each priority level.
std::vector<index_t> execution_order(const TaskPriority& prio, bool shuffle_ties,
                                     std::uint64_t seed);

}  // namespace selinv
