#include "selinv/symbolic.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace selinv {

bool SymPattern::has(index_t i, index_t j) const {
  auto b = row_idx.begin() + col_ptr[j], e = row_idx.begin() + col_ptr[j + 1];
  return std::binary_search(b, e, i);
}

SupernodePartition SupernodePartition::from_first_cols(std::vector<index_t> first,
                                                       index_t n) {
  if (first.empty() || first.front() != 0)
    throw std::invalid_argument("SupernodePartition: must start at column 0");
  if (first.back() != n) first.push_back(n);
  SupernodePartition p;
  p.first_col = std::move(first);
  p.col_to_snode.resize(n);
  for (index_t k = 0; k < p.count(); ++k) {
    if (p.end(k) <= p.begin(k))
      throw std::invalid_argument("SupernodePartition: empty supernode");
    for (index_t c = p.begin(k); c < p.end(k); ++c) p.col_to_snode[c] = k;
  }
  return p;
}

SupernodePartition SupernodePartition::singletons(index_t n) {
  std::vector<index_t> first(n + 1);
  for (index_t i = 0; i <= n; ++i) first[i] = i;
  SupernodePartition p;
  p.first_col = std::move(first);
  p.col_to_snode.resize(n);
  for (index_t i = 0; i < n; ++i) p.col_to_snode[i] = i;
  return p;
}

namespace {

const FillPattern::Block* find_block(const std::vector<FillPattern::Block>& v, index_t b) {
  auto it = std::lower_bound(v.begin(), v.end(), b,
                             [](const FillPattern::Block& x, index_t y) { return x.block < y; });
  if (it != v.end() && it->block == b) return &*it;
  return nullptr;
}

}  // namespace

const FillPattern::Block* FillPattern::find_l(index_t k, index_t i) const {
  return find_block(l_blocks[k], i);
}
const FillPattern::Block* FillPattern::find_u(index_t k, index_t j) const {
  return find_block(u_blocks[k], j);
}

bool FillPattern::block_stored(index_t i, index_t j) const {
  if (i == j) return true;
  if (i > j) return find_l(j, i) != nullptr;
  return find_u(i, j) != nullptr;
}

std::uint64_t FillPattern::stored_nnz(const SupernodePartition& part) const {
  std::uint64_t total = 0;
  for (index_t k = 0; k < count(); ++k) {
    const std::uint64_t d = part.size(k);
    total += d * d;
    for (const auto& b : l_blocks[k]) total += d * b.indices.size();
    for (const auto& b : u_blocks[k]) total += d * b.indices.size();
  }
  return total;
}

index_t EliminationTree::tree_depth() const {
  index_t md = -1;
  for (index_t d : depth) md = std::max(md, d);
  return md + 1;
}

SymPattern symmetrize_pattern_raw(index_t n_rows, index_t n_cols,
                                  const std::vector<index_t>& col_ptr,
                                  const std::vector<index_t>& row_idx) {
  if (n_rows != n_cols) throw std::invalid_argument("symmetrize_pattern: non-square input");
  const index_t n = n_cols;
  // row-wise adjacency (pattern of A^T)
  std::vector<index_t> rp(n + 1, 0), ri(row_idx.size());
  for (index_t r : row_idx) rp[r + 1]++;
  for (index_t i = 0; i < n; ++i) rp[i + 1] += rp[i];
  {
    std::vector<index_t> next(rp.begin(), rp.end() - 1);
    for (index_t j = 0; j < n; ++j)
      for (index_t k = col_ptr[j]; k < col_ptr[j + 1]; ++k) ri[next[row_idx[k]]++] = j;
  }
  SymPattern s;
  s.n = n;
  s.col_ptr.assign(n + 1, 0);
  std::vector<index_t> merged;
  std::vector<std::vector<index_t>> cols(n);
  for (index_t j = 0; j < n; ++j) {
    merged.clear();
    merged.push_back(j);
    for (index_t k = col_ptr[j]; k < col_ptr[j + 1]; ++k) merged.push_back(row_idx[k]);
    for (index_t k = rp[j]; k < rp[j + 1]; ++k) merged.push_back(ri[k]);
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    cols[j] = merged;
    s.col_ptr[j + 1] = s.col_ptr[j] + static_cast<index_t>(merged.size());
  }
  s.row_idx.reserve(s.col_ptr[n]);
  for (index_t j = 0; j < n; ++j)
    s.row_idx.insert(s.row_idx.end(), cols[j].begin(), cols[j].end());
  return s;
}

SymPattern permute_pattern(const SymPattern& s, const Permutation& perm) {
  if (perm.size() != s.n) throw std::invalid_argument("permute_pattern: size mismatch");
  SymPattern out;
  out.n = s.n;
  out.col_ptr.assign(s.n + 1, 0);
  const auto& inv = perm.inverse();
  std::vector<index_t> col;
  out.row_idx.reserve(s.row_idx.size());
  for (index_t j = 0; j < s.n; ++j) {
    index_t oj = inv[j];
    col.clear();
    for (index_t k = s.col_ptr[oj]; k < s.col_ptr[oj + 1]; ++k)
      col.push_back(perm[s.row_idx[k]]);
    std::sort(col.begin(), col.end());
    out.row_idx.insert(out.row_idx.end(), col.begin(), col.end());
    out.col_ptr[j + 1] = out.col_ptr[j] + static_cast<index_t>(col.size());
  }
  return out;
}

Permutation fill_reducing_order(const SymPattern& s) {
  const index_t n = s.n;
  std::vector<std::set<index_t>> adj(n);
  for (index_t j = 0; j < n; ++j)
    for (index_t k = s.col_ptr[j]; k < s.col_ptr[j + 1]; ++k)
      if (s.row_idx[k] != j) adj[j].insert(s.row_idx[k]);

  std::vector<char> done(n, 0);
  std::vector<index_t> perm(n);
  std::vector<index_t> nbrs;
  for (index_t step = 0; step < n; ++step) {
    index_t best = -1;
    std::size_t best_deg = 0;
    for (index_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      if (best == -1 || adj[v].size() < best_deg) {
        best = v;
        best_deg = adj[v].size();
      }
    }
    perm[best] = step;
    done[best] = 1;
    nbrs.assign(adj[best].begin(), adj[best].end());
    for (index_t u : nbrs) {
      adj[u].erase(best);
      for (index_t w : nbrs)
        if (w != u) adj[u].insert(w);
    }
    adj[best].clear();
  }
  return Permutation(std::move(perm));
}

namespace {

// Forward symbolic elimination pass on the permuted symmetric pattern.
// Relaxed supernodes are formed on the fly (or taken from `fixed`); padded
// structure propagates so downstream fill accounts for stored zeros.
struct SymbolicPass {
  const SymPattern& sp;
  index_t n;
  // contributions: rows of a finished supernode, parked at their parent column
  std::vector<std::vector<std::vector<index_t>>> contrib;
  std::vector<index_t> snode_first;                // result partition boundaries
  std::vector<std::vector<index_t>> snode_rows;    // rows strictly below each panel

  explicit SymbolicPass(const SymPattern& pattern) : sp(pattern), n(pattern.n), contrib(n) {}

  std::vector<index_t> column_struct(index_t c) const {
    std::vector<index_t> out;
    const index_t* b = sp.row_idx.data() + sp.col_ptr[c];
    const index_t* e = sp.row_idx.data() + sp.col_ptr[c + 1];
    for (const index_t* p = b; p != e; ++p)
      if (*p > c) out.push_back(*p);
    for (const auto& r : contrib[c])
      for (index_t row : r)
        if (row > c) out.push_back(row);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void close_snode(index_t s, index_t e, std::vector<index_t> rows) {
    (void)s;
    (void)e;
    if (!rows.empty()) contrib[rows.front()].push_back(rows);
    snode_rows.push_back(std::move(rows));
  }

  // Relaxation-driven pass: decides the partition.
  void run_adaptive(const RelaxParams& relax) {
    std::vector<std::vector<index_t>> own(n);
    index_t s = -1;
    std::vector<index_t> rcur;
    for (index_t c = 0; c < n; ++c) {
      own[c] = column_struct(c);
      if (s < 0) {
        s = c;
        snode_first.push_back(s);
        rcur = own[c];
        continue;
      }
      bool ok = (c - s) < relax.max_snode_size;
      std::vector<index_t> rnew;
      if (ok) {
        rnew.reserve(rcur.size() + own[c].size());
        std::set_union(rcur.begin(), rcur.end(), own[c].begin(), own[c].end(),
                       std::back_inserter(rnew));
        if (!rnew.empty() && rnew.front() == c) rnew.erase(rnew.begin());
        const index_t rsz = static_cast<index_t>(rnew.size());
        for (index_t j = s; ok && j <= c; ++j) {
          // stored rows below column c that are structural in column j
          auto it = std::upper_bound(own[j].begin(), own[j].end(), c);
          index_t own_below = static_cast<index_t>(own[j].end() - it);
          if (rsz - own_below > relax.max_extra_zeros_per_col) ok = false;
        }
      }
      if (ok) {
        rcur = std::move(rnew);
      } else {
        close_snode(s, c - 1, std::move(rcur));
        // the closed supernode may have parked rows at column c
        own[c] = column_struct(c);
        s = c;
        snode_first.push_back(s);
        rcur = own[c];
      }
    }
    if (s >= 0) close_snode(s, n - 1, std::move(rcur));
  }

  // Fixed-partition pass: recomputes the same unions for a given partition.
  void run_fixed(const SupernodePartition& part) {
    for (index_t k = 0; k < part.count(); ++k) {
      const index_t s = part.begin(k), e = part.end(k) - 1;
      snode_first.push_back(s);
      std::vector<index_t> rows;
      for (index_t c = s; c <= e; ++c)
        for (index_t row : column_struct(c))
          if (row > e) rows.push_back(row);
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      close_snode(s, e, std::move(rows));
    }
  }
};

}  // namespace

SupernodePartition detect_supernodes(const SymPattern& s, const Permutation& perm,
                                     const RelaxParams& relax) {
  if (relax.max_snode_size < 1 || relax.max_extra_zeros_per_col < 0)
    throw std::invalid_argument("detect_supernodes: invalid RelaxParams");
  SymPattern sp = permute_pattern(s, perm);
  SymbolicPass pass(sp);
  pass.run_adaptive(relax);
  return SupernodePartition::from_first_cols(std::move(pass.snode_first), s.n);
}

FillPattern symbolic_factorize(const SymPattern& s, const Permutation& perm,
                               const SupernodePartition& part) {
  if (part.n() != s.n) throw std::invalid_argument("symbolic_factorize: inconsistent inputs");
  SymPattern sp = permute_pattern(s, perm);
  SymbolicPass pass(sp);
  pass.run_fixed(part);

  FillPattern fill;
  fill.l_blocks.resize(part.count());
  fill.u_blocks.resize(part.count());
  for (index_t k = 0; k < part.count(); ++k) {
    const auto& rows = pass.snode_rows[k];
    std::size_t i = 0;
    while (i < rows.size()) {
      index_t blk = part.col_to_snode[rows[i]];
      FillPattern::Block b;
      b.block = blk;
      while (i < rows.size() && part.col_to_snode[rows[i]] == blk)
        b.indices.push_back(rows[i++]);
      fill.l_blocks[k].push_back(b);
      fill.u_blocks[k].push_back(std::move(b));
    }
  }
  return fill;
}

EliminationTree elimination_tree(const FillPattern& fill, const SupernodePartition& part) {
  if (fill.count() != part.count())
    throw std::invalid_argument("elimination_tree: inconsistent inputs");
  const index_t ns = fill.count();
  EliminationTree t;
  t.parent.assign(ns, EliminationTree::kNoParent);
  t.depth.assign(ns, 0);
  for (index_t k = 0; k < ns; ++k) {
    index_t p = EliminationTree::kNoParent;
    if (!fill.l_blocks[k].empty()) p = fill.l_blocks[k].front().block;
    if (!fill.u_blocks[k].empty())
      p = (p == EliminationTree::kNoParent) ? fill.u_blocks[k].front().block
                                            : std::min(p, fill.u_blocks[k].front().block);
    t.parent[k] = p;
  }
  for (index_t k = ns - 1; k >= 0; --k)
    if (t.parent[k] != EliminationTree::kNoParent) t.depth[k] = t.depth[t.parent[k]] + 1;

  // children-first traversal, roots and children in ascending order
  std::vector<std::vector<index_t>> children(ns);
  for (index_t k = 0; k < ns; ++k)
    if (t.parent[k] != EliminationTree::kNoParent) children[t.parent[k]].push_back(k);
  t.postorder.reserve(ns);
  std::vector<std::pair<index_t, std::size_t>> stack;
  for (index_t r = ns - 1; r >= 0; --r)
    if (t.parent[r] == EliminationTree::kNoParent) stack.emplace_back(r, 0);
  while (!stack.empty()) {
    auto& [node, ci] = stack.back();
    if (ci < children[node].size()) {
      index_t child = children[node][children[node].size() - 1 - ci];
      ++ci;
      stack.emplace_back(child, 0);
    } else {
      t.postorder.push_back(node);
      stack.pop_back();
    }
  }
  return t;
}

}  // namespace selinv
