#pragma once

#include <map>
#include <utility>

#include "selinv/dist.hpp"
#include "selinv/factor.hpp"
#include "selinv/selinv.hpp"

namespace selinv {

/// 2D block-cyclic distribution of the supernodal block store: block (I,J) is
/// held only by owner(I,J). Index lists follow the LUFactors layout: rows for
/// blocks below the diagonal, columns for blocks to its right.
template <class T>
struct PMatrix {
  struct Block {
    index_t bi = 0, bj = 0;
    std::vector<index_t> idx;  // scalar rows (bi > bj), cols (bi < bj), empty on diagonal
    DenseBlock<T> data;
    int version = 0;  // bumped once when the owning task commits its update
  };

  ProcGrid grid;
  SupernodePartition part;
  std::vector<std::map<std::pair<index_t, index_t>, Block>> local;  // per rank

  Block* find(index_t bi, index_t bj) {
    auto& m = local[grid.owner0(bi, bj)];
    auto it = m.find({bi, bj});
    return it == m.end() ? nullptr : &it->second;
  }
  const Block* find(index_t bi, index_t bj) const {
    const auto& m = local[grid.owner0(bi, bj)];
    auto it = m.find({bi, bj});
    return it == m.end() ? nullptr : &it->second;
  }
};

/// Scatters normalized factors over the grid; every stored block lands on its
/// owner exactly once.
template <class T>
PMatrix<T> distribute(const LUFactors<T>& fac, const ProcGrid& g) {
  if (fac.state != FactorState::Normalized)
    throw std::logic_error("distribute: factors must be normalized");
  PMatrix<T> pm;
  pm.grid = g;
  pm.part = fac.part;
  pm.local.resize(g.size());
  for (index_t k = 0; k < fac.part.count(); ++k) {
    const auto& sn = fac.snodes[k];
    typename PMatrix<T>::Block db;
    db.bi = db.bj = k;
    db.data = sn.diag;
    pm.local[g.owner0(k, k)].emplace(std::make_pair(k, k), std::move(db));
    for (const auto& lb : sn.l_blocks) {
      typename PMatrix<T>::Block b;
      b.bi = lb.block;
      b.bj = k;
      b.idx = lb.idx;
      b.data = lb.data;
      pm.local[g.owner0(b.bi, b.bj)].emplace(std::make_pair(b.bi, b.bj), std::move(b));
    }
    for (const auto& ub : sn.u_blocks) {
      typename PMatrix<T>::Block b;
      b.bi = k;
      b.bj = ub.block;
      b.idx = ub.idx;
      b.data = ub.data;
      pm.local[g.owner0(b.bi, b.bj)].emplace(std::make_pair(b.bi, b.bj), std::move(b));
    }
  }
  return pm;
}

/// Collects the distributed blocks back into fac (structure must match).
template <class T>
void gather(const PMatrix<T>& pm, LUFactors<T>& fac) {
  for (index_t k = 0; k < fac.part.count(); ++k) {
    auto& sn = fac.snodes[k];
    const auto* db = pm.find(k, k);
    if (!db) throw std::logic_error("gather: missing diagonal block");
    sn.diag = db->data;
    for (auto& lb : sn.l_blocks) {
      const auto* b = pm.find(lb.block, k);
      if (!b || b->idx != lb.idx) throw std::logic_error("gather: missing L block");
      lb.data = b->data;
    }
    for (auto& ub : sn.u_blocks) {
      const auto* b = pm.find(k, ub.block);
      if (!b || b->idx != ub.idx) throw std::logic_error("gather: missing U block");
      ub.data = b->data;
    }
  }
}

struct SimOptions {
  std::uint64_t seed = 0;
  bool naive_collectives = false;
  bool shuffle_ties = false;
};

namespace detail {

/// Deterministic tree-order combine: children before parent, left before
/// right. values holds one partial per tree position (may be empty for ranks
/// that contributed nothing).
template <class T>
void tree_combine(const CommTree& t, int pos, std::vector<DenseBlock<T>>& values) {
  for (int c : t.children_pos(pos)) {
    tree_combine(t, c, values);
    DenseBlock<T>& child = values[c];
    DenseBlock<T>& own = values[pos];
    if (child.rows() == 0) continue;
    if (own.rows() == 0) {
      own = std::move(child);
      continue;
    }
    if (own.rows() != child.rows() || own.cols() != child.cols())
      throw std::invalid_argument("tree_combine: partial shape mismatch");
    for (std::size_t i = 0; i < own.data().size(); ++i) own.data()[i] += child.data()[i];
  }
}

}  // namespace detail

/// Simulated distributed selected inversion: supernodes in priority order,
/// per supernode the broadcast / local GEMM / reduction choreography with the
/// diagonal updated through the L-panel identity at its owner. Numeric results
/// differ from the sequential path only by summation order. Returns the
/// communication statistics; the inverted blocks replace the factors in pm.
template <class T>
SimStats parallel_selinv(PMatrix<T>& pm, const TaskPriority& prio, const SimOptions& opt) {
  const SupernodePartition& part = pm.part;
  const ProcGrid& g = pm.grid;
  const index_t ns = part.count();
  const std::uint64_t bpe = sizeof(T);
  SimEngine eng(g.size(), ns);

  const std::vector<index_t> order = execution_order(prio, opt.shuffle_ties, opt.seed);

  // per-supernode block lists reconstructed from the distributed store
  std::vector<std::vector<index_t>> row_blocks(ns), col_blocks(ns);
  for (int r = 0; r < g.size(); ++r) {
    for (const auto& [key, b] : pm.local[r]) {
      if (b.bi > b.bj) row_blocks[b.bj].push_back(b.bi);
      if (b.bi < b.bj) col_blocks[b.bi].push_back(b.bj);
    }
  }
  for (index_t k = 0; k < ns; ++k) {
    std::sort(row_blocks[k].begin(), row_blocks[k].end());
    std::sort(col_blocks[k].begin(), col_blocks[k].end());
    if (row_blocks[k] != col_blocks[k])
      throw std::logic_error("parallel_selinv: block structure not symmetric");
  }

  std::vector<char> processed(ns, 0);
  std::vector<index_t> pos_buf;

  auto tree_seed = [&](CollectiveKind kind, index_t k, index_t line) {
    std::uint64_t h = hash_combine(opt.seed, static_cast<std::uint64_t>(kind));
    h = hash_combine(h, static_cast<std::uint64_t>(k));
    return hash_combine(h, static_cast<std::uint64_t>(line));
  };

  // reads the sub-block of A~^{-T}_{bi,bj} at K's row list rows / col list
  // cols out of the ancestor that stores it
  auto read_sub = [&](index_t bi, index_t bj, const std::vector<index_t>& rows,
                      const std::vector<index_t>& cols) {
    DenseBlock<T> sub(static_cast<index_t>(rows.size()), static_cast<index_t>(cols.size()));
    const typename PMatrix<T>::Block* b = pm.find(bi, bj);
    if (!b) throw std::logic_error("parallel_selinv: missing ancestor block");
    if (b->version != 1) throw std::logic_error("parallel_selinv: dependency violation");
    if (bi == bj) {
      const index_t s0 = part.begin(bi);
      for (index_t j = 0; j < sub.cols(); ++j)
        for (index_t i = 0; i < sub.rows(); ++i)
          sub(i, j) = b->data(rows[i] - s0, cols[j] - s0);
    } else if (bi > bj) {
      detail::positions_in(rows, b->idx, pos_buf);
      const index_t c0 = part.begin(bj);
      for (index_t j = 0; j < sub.cols(); ++j)
        for (index_t i = 0; i < sub.rows(); ++i)
          sub(i, j) = b->data(pos_buf[i], cols[j] - c0);
    } else {
      detail::positions_in(cols, b->idx, pos_buf);
      const index_t r0 = part.begin(bi);
      for (index_t j = 0; j < sub.cols(); ++j)
        for (index_t i = 0; i < sub.rows(); ++i)
          sub(i, j) = b->data(rows[i] - r0, pos_buf[j]);
    }
    return sub;
  };

  for (index_t k : order) {
    const index_t d = part.size(k);
    const int rank_kk = g.owner0(k, k);
    typename PMatrix<T>::Block* diag = pm.find(k, k);
    if (!diag || diag->version != 0)
      throw std::logic_error("parallel_selinv: diagonal block state");

    DenseBlock<T> dinv = detail::diag_inv_transpose(diag->data, nullptr);
    eng.compute(rank_kk, CollectiveKind::ReduceD, k);

    const std::vector<index_t>& cblk = row_blocks[k];  // == col_blocks[k]
    const index_t nc = static_cast<index_t>(cblk.size());
    if (nc == 0) {
      diag->data = std::move(dinv);
      diag->version = 1;
      processed[k] = 1;
      continue;
    }
    for (index_t bi : cblk)
      if (!processed[bi]) throw std::logic_error("parallel_selinv: schedule violates tree order");

    std::vector<typename PMatrix<T>::Block*> lpan(nc), upan(nc);
    for (index_t a = 0; a < nc; ++a) {
      lpan[a] = pm.find(cblk[a], k);
      upan[a] = pm.find(k, cblk[a]);
      if (!lpan[a] || !upan[a] || lpan[a]->version != 0 || upan[a]->version != 0)
        throw std::logic_error("parallel_selinv: panel block state");
    }

    // (a) broadcast each L^ block across the row group owning A~^{-T}_{I, C}
    for (index_t a = 0; a < nc; ++a) {
      const index_t bi = cblk[a];
      std::vector<int> group{g.owner0(bi, k)};
      for (index_t bj : cblk) group.push_back(g.owner0(bi, bj));
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      eng.broadcast(build_comm_tree(g.owner0(bi, k), group,
                                    tree_seed(CollectiveKind::BcastL, k, bi),
                                    opt.naive_collectives),
                    lpan[a]->data.data().size() * bpe, CollectiveKind::BcastL, k);
    }
    // (b) broadcast each U^ block down the column group owning A~^{-T}_{C, J}
    for (index_t a = 0; a < nc; ++a) {
      const index_t bj = cblk[a];
      std::vector<int> group{g.owner0(k, bj)};
      for (index_t bi : cblk) group.push_back(g.owner0(bi, bj));
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      eng.broadcast(build_comm_tree(g.owner0(k, bj), group,
                                    tree_seed(CollectiveKind::BcastU, k, bj),
                                    opt.naive_collectives),
                    upan[a]->data.data().size() * bpe, CollectiveKind::BcastU, k);
    }

    // (1)(2) local partial products on every A~^{-T}_{I,J} owner
    // partial[i][j]: contribution L^_{I,K}^T A~^{-T}_{I,J} (for the U row) and
    // A~^{-T}_{I,J} U^_{K,J}^T (for the L column)
    std::vector<std::vector<DenseBlock<T>>> upart(nc), lpart(nc);
    for (index_t a = 0; a < nc; ++a) {
      upart[a].resize(nc);
      lpart[a].resize(nc);
    }
    for (index_t a = 0; a < nc; ++a) {
      const index_t bi = cblk[a];
      for (index_t b = 0; b < nc; ++b) {
        const index_t bj = cblk[b];
        DenseBlock<T> sub = read_sub(bi, bj, lpan[a]->idx, upan[b]->idx);
        upart[a][b].resize(d, sub.cols());
        dense_gemm(T{1}, lpan[a]->data, true, sub, false, T{0}, upart[a][b]);
        lpart[a][b].resize(sub.rows(), d);
        dense_gemm(T{1}, sub, false, upan[b]->data, true, T{0}, lpart[a][b]);
        eng.compute(g.owner0(bi, bj), CollectiveKind::BcastL, k);
        eng.compute(g.owner0(bi, bj), CollectiveKind::BcastU, k);
      }
    }

    // (c) column-group reductions onto owner(K, J): new U row blocks
    std::vector<DenseBlock<T>> new_u(nc), new_l(nc);
    for (index_t b = 0; b < nc; ++b) {
      const index_t bj = cblk[b];
      std::vector<int> group{g.owner0(k, bj)};
      for (index_t bi : cblk) group.push_back(g.owner0(bi, bj));
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      CommTree t = build_comm_tree(g.owner0(k, bj), group,
                                   tree_seed(CollectiveKind::ReduceU, k, bj),
                                   opt.naive_collectives);
      // rank-local pre-combination in ascending I, then tree order
      std::vector<DenseBlock<T>> slots(t.size());
      std::vector<int> pos_of(g.size(), -1);
      for (int p = 0; p < t.size(); ++p) pos_of[t.order[p]] = p;
      for (index_t a = 0; a < nc; ++a) {
        const int p = pos_of[g.owner0(cblk[a], bj)];
        DenseBlock<T>& slot = slots[p];
        if (slot.rows() == 0)
          slot = std::move(upart[a][b]);
        else
          for (std::size_t i = 0; i < slot.data().size(); ++i)
            slot.data()[i] += upart[a][b].data()[i];
      }
      eng.reduce(t, static_cast<std::uint64_t>(d) * upan[b]->idx.size() * bpe,
                 CollectiveKind::ReduceU, k);
      detail::tree_combine(t, 0, slots);
      new_u[b] = std::move(slots[0]);
      for (T& v : new_u[b].data()) v = -v;
    }

    // (d) row-group reductions onto owner(I, K): new L column blocks
    for (index_t a = 0; a < nc; ++a) {
      const index_t bi = cblk[a];
      std::vector<int> group{g.owner0(bi, k)};
      for (index_t bj : cblk) group.push_back(g.owner0(bi, bj));
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      CommTree t = build_comm_tree(g.owner0(bi, k), group,
                                   tree_seed(CollectiveKind::ReduceL, k, bi),
                                   opt.naive_collectives);
      std::vector<DenseBlock<T>> slots(t.size());
      std::vector<int> pos_of(g.size(), -1);
      for (int p = 0; p < t.size(); ++p) pos_of[t.order[p]] = p;
      for (index_t b = 0; b < nc; ++b) {
        const int p = pos_of[g.owner0(bi, cblk[b])];
        DenseBlock<T>& slot = slots[p];
        if (slot.rows() == 0)
          slot = std::move(lpart[a][b]);
        else
          for (std::size_t i = 0; i < slot.data().size(); ++i)
            slot.data()[i] += lpart[a][b].data()[i];
      }
      eng.reduce(t, static_cast<std::uint64_t>(lpan[a]->idx.size()) * d * bpe,
                 CollectiveKind::ReduceL, k);
      detail::tree_combine(t, 0, slots);
      new_l[a] = std::move(slots[0]);
      for (T& v : new_l[a].data()) v = -v;
    }

    // (3)(e)(4) diagonal: partials L^_{I,K}^T A~^{-T}_{I,K} at each owner(I,K),
    // reduced onto owner(K,K) and subtracted from (L_KK)^{-T} (U_KK)^{-T}
    {
      std::vector<int> group{rank_kk};
      for (index_t bi : cblk) group.push_back(g.owner0(bi, k));
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      CommTree t = build_comm_tree(rank_kk, group, tree_seed(CollectiveKind::ReduceD, k, 0),
                                   opt.naive_collectives);
      std::vector<DenseBlock<T>> slots(t.size());
      std::vector<int> pos_of(g.size(), -1);
      for (int p = 0; p < t.size(); ++p) pos_of[t.order[p]] = p;
      for (index_t a = 0; a < nc; ++a) {
        DenseBlock<T> q(d, d);
        dense_gemm(T{1}, lpan[a]->data, true, new_l[a], false, T{0}, q);
        eng.compute(g.owner0(cblk[a], k), CollectiveKind::ReduceD, k);
        const int p = pos_of[g.owner0(cblk[a], k)];
        DenseBlock<T>& slot = slots[p];
        if (slot.rows() == 0)
          slot = std::move(q);
        else
          for (std::size_t i = 0; i < slot.data().size(); ++i)
            slot.data()[i] += q.data()[i];
      }
      eng.reduce(t, static_cast<std::uint64_t>(d) * d * bpe, CollectiveKind::ReduceD, k);
      detail::tree_combine(t, 0, slots);
      eng.compute(rank_kk, CollectiveKind::ReduceD, k);
      // A~^{-T}_{K,K} = (L_KK)^{-T} (U_KK)^{-T} - L^^T A~^{-T}_{C,K}
      for (std::size_t i = 0; i < dinv.data().size(); ++i)
        dinv.data()[i] -= slots[0].data()[i];
    }

    // commit: overwrite supernode K's blocks with the inverse values
    for (index_t a = 0; a < nc; ++a) {
      lpan[a]->data = std::move(new_l[a]);
      lpan[a]->version = 1;
      upan[a]->data = std::move(new_u[a]);
      upan[a]->version = 1;
    }
    diag->data = std::move(dinv);
    diag->version = 1;
    processed[k] = 1;
  }
  return eng.stats();
}

}  // namespace selinv
