#include "selinv/dist.hpp"

#include <algorithm>
#include <stdexcept>

namespace selinv {

std::vector<int> CommTree::children_pos(int pos) const {
  std::vector<int> out;
  const int m = size();
  if (star) {
    if (pos == 0)
      for (int i = 1; i < m; ++i) out.push_back(i);
    return out;
  }
  if (2 * pos + 1 < m) out.push_back(2 * pos + 1);
  if (2 * pos + 2 < m) out.push_back(2 * pos + 2);
  return out;
}

int CommTree::depth() const {
  const int m = size();
  if (m <= 1) return 0;
  if (star) return 1;
  int d = 0;
  for (int v = m - 1; v > 0; v = (v - 1) / 2) ++d;
  return d;
}

int CommTree::max_fanout() const {
  int best = 0;
  for (int p = 0; p < size(); ++p)
    best = std::max(best, static_cast<int>(children_pos(p).size()));
  return best;
}

bool CommTree::spans(const std::vector<int>& participants) const {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  return sorted == participants;
}

CommTree build_comm_tree(int root, const std::vector<int>& participants,
                         std::uint64_t seed, bool star) {
  if (participants.empty()) throw std::invalid_argument("build_comm_tree: no participants");
  if (!std::is_sorted(participants.begin(), participants.end()))
    throw std::invalid_argument("build_comm_tree: participants not sorted");
  std::vector<int> others;
  others.reserve(participants.size());
  bool root_found = false;
  for (int r : participants) {
    if (r == root)
      root_found = true;
    else
      others.push_back(r);
  }
  if (!root_found) throw std::invalid_argument("build_comm_tree: root not a participant");

  CommTree t;
  t.root = root;
  t.star = star;
  t.order.push_back(root);
  if (!others.empty()) {
    std::uint64_t h = seed;
    h = hash_combine(h, static_cast<std::uint64_t>(root));
    for (int r : participants) h = hash_combine(h, static_cast<std::uint64_t>(r));
    t.shift = static_cast<std::size_t>(mix64(h) % others.size());
    for (std::size_t i = 0; i < others.size(); ++i)
      t.order.push_back(others[(i + t.shift) % others.size()]);
  }
  return t;
}

std::uint64_t make_tag(CollectiveKind k, index_t snode, index_t line) {
  return (static_cast<std::uint64_t>(k) << 56) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(snode)) << 24) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(line) & 0xffffff);
}

SimStats comm_stats(const std::vector<SimEvent>& log, int nranks, index_t n_snodes) {
  SimStats s;
  s.nranks = nranks;
  s.msgs_sent.assign(nranks, 0);
  s.msgs_recv.assign(nranks, 0);
  s.bytes_sent.assign(nranks, 0);
  s.bytes_recv.assign(nranks, 0);
  s.events_per_snode.assign(n_snodes, 0);
  for (const SimEvent& e : log) {
    const index_t snode = static_cast<index_t>((e.tag >> 24) & 0xffffffff);
    if (snode >= 0 && snode < n_snodes) s.events_per_snode[snode]++;
    s.critical_path = std::max(s.critical_path, e.tick);
    if (e.src == e.dst) continue;  // local compute step
    s.msgs_sent[e.src]++;
    s.msgs_recv[e.dst]++;
    s.bytes_sent[e.src] += e.bytes;
    s.bytes_recv[e.dst] += e.bytes;
    s.total_messages++;
    s.total_bytes += e.bytes;
    const int kind = static_cast<int>(e.tag >> 56);
    if (kind >= 0 && kind < kCollectiveKinds) s.msgs_by_kind[kind]++;
  }
  return s;
}

void stats_csv(const SimStats& s, std::ostream& out) {
  out << "rank,msgs_sent,msgs_recv,bytes_sent,bytes_recv\n";
  for (int r = 0; r < s.nranks; ++r) {
    out << (r + 1) << ',' << s.msgs_sent[r] << ',' << s.msgs_recv[r] << ','
        << s.bytes_sent[r] << ',' << s.bytes_recv[r] << '\n';
  }
  out << "# critical_path_ticks=" << s.critical_path << '\n';
  out << "# total_messages=" << s.total_messages << '\n';
  out << "# total_bytes=" << s.total_bytes << '\n';
}

SimEngine::SimEngine(int nranks, index_t n_snodes)
    : nranks_(nranks), n_snodes_(n_snodes), clock_(nranks, 0) {}

void SimEngine::message(int src, int dst, std::uint64_t bytes, CollectiveKind k,
                        index_t snode, index_t line) {
  if (src < 0 || src >= nranks_ || dst < 0 || dst >= nranks_)
    throw std::out_of_range("SimEngine::message: rank out of range");
  clock_[src] += 1;  // send
  clock_[dst] = std::max(clock_[dst], clock_[src]) + 1;  // delivery latency
  log_.push_back({clock_[dst], src, dst, make_tag(k, snode, line), bytes});
}

void SimEngine::compute(int rank, CollectiveKind k, index_t snode) {
  clock_[rank] += 1;
  log_.push_back({clock_[rank], rank, rank, make_tag(k, snode, -1), 0});
}

void SimEngine::track_collective(const std::vector<std::uint64_t>& sends, int group) {
  std::uint64_t mx = 0;
  for (std::uint64_t v : sends) mx = std::max(mx, v);
  max_sends_per_collective_ = std::max(max_sends_per_collective_, mx);
  if (group > 3) max_sends_group_gt3_ = std::max(max_sends_group_gt3_, mx);
}

void SimEngine::broadcast(const CommTree& t, std::uint64_t bytes, CollectiveKind k,
                          index_t snode) {
  std::vector<std::uint64_t> sends(nranks_, 0);
  index_t line = 0;
  for (int p = 0; p < t.size(); ++p) {
    for (int c : t.children_pos(p)) {
      message(t.order[p], t.order[c], bytes, k, snode, line++);
      sends[t.order[p]]++;
    }
  }
  track_collective(sends, t.size());
}

void SimEngine::reduce(const CommTree& t, std::uint64_t bytes, CollectiveKind k,
                       index_t snode) {
  std::vector<std::uint64_t> sends(nranks_, 0);
  index_t line = 0;
  for (int p = t.size() - 1; p > 0; --p) {
    const int parent = t.parent_pos(p);
    message(t.order[p], t.order[parent], bytes, k, snode, line++);
    sends[t.order[p]]++;
    compute(t.order[parent], k, snode);  // combine
  }
  track_collective(sends, t.size());
}

SimStats SimEngine::stats() const {
  SimStats s = comm_stats(log_, nranks_, n_snodes_);
  s.max_sends_per_collective = max_sends_per_collective_;
  s.max_sends_group_gt3 = max_sends_group_gt3_;
  return s;
}

TaskPriority schedule_priorities(const EliminationTree& et) {
  TaskPriority p;
  p.sigma.resize(et.count());
  for (index_t k = 0; k < et.count(); ++k) p.sigma[k] = et.depth[k] + 1;
  return p;
}

std::vector<index_t> execution_order(const TaskPriority& prio, bool shuffle_ties,
                                     std::uint64_t seed) {
  const index_t ns = static_cast<index_t>(prio.sigma.size());
  std::vector<index_t> order(ns);
  for (index_t k = 0; k < ns; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    if (prio.sigma[a] != prio.sigma[b]) return prio.sigma[a] < prio.sigma[b];
    return a > b;
  });
  if (shuffle_ties) {
    std::uint64_t state = hash_combine(seed, 0x7ea5c0de);
    index_t i = 0;
    while (i < ns) {
      index_t j = i;
      while (j < ns && prio.sigma[order[j]] == prio.sigma[order[i]]) ++j;
      for (index_t a = j - 1; a > i; --a) {
        state = mix64(state);
        const index_t b = i + static_cast<index_t>(state % static_cast<std::uint64_t>(a - i + 1));
        std::swap(order[a], order[b]);
      }
      i = j;
    }
  }
  return order;
}

}  // namespace selinv
