#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "selinv/csc.hpp"
#include "selinv/dense.hpp"
#include "selinv/symbolic.hpp"

namespace selinv {

enum class FactorState { Factored, Normalized, Inverted };

template <class T>
struct LUBlock {
  index_t block = 0;            // block row (L) / block column (U)
  std::vector<index_t> idx;     // global scalar row (L) / column (U) indices
  DenseBlock<T> data;           // L: |idx| x d, U: d x |idx|
};

template <class T>
struct SupernodeData {
  // d x d dense block packing the unit-lower L (diagonal implicit) and the
  // upper U including its diagonal. Holds A~^{-T}_{K,K} once inverted.
  DenseBlock<T> diag;
  std::vector<LUBlock<T>> l_blocks;
  std::vector<LUBlock<T>> u_blocks;
};

struct FactorOptions {
  bool perturb_pivots = false;
  // Pivots with |pivot| < threshold are replaced (phase preserved); the
  // default threshold is sqrt(eps) * ||A~||_inf, applied when <= 0.
  double pivot_threshold = 0.0;
};

/// Supernodal block storage of L and U; after selected inversion the same
/// blocks hold A~^{-T} in situ.
template <class T>
struct LUFactors {
  SupernodePartition part;
  FillPattern fill;
  Permutation row_perm;  // P: original row -> permuted row
  Permutation col_perm;  // Q: original col -> permuted col
  std::vector<SupernodeData<T>> snodes;
  FactorState state = FactorState::Factored;
  FlopCounter flops;
  index_t n = 0;
  std::vector<index_t> perturbed_pivots;
  // retained by selected_inversion(debug): per-supernode max deviation
  // between the two diagonal-update formulas
  std::vector<double> diag_crosscheck;
  std::size_t peak_gather_elems = 0;

  std::uint64_t stored_nnz() const { return fill.stored_nnz(part); }
};

namespace detail {

/// Unpivoted dense LU of the leading d x d of w, packed in place
/// (unit-lower below the diagonal, upper on and above). Flop counts match
/// naive Gaussian elimination: 1 per division, 2 per multiply-add.
template <class T>
void dense_lu_packed(DenseBlock<T>& w, index_t d, index_t global_col0,
                     const FactorOptions& opts, double pert,
                     std::vector<index_t>& perturbed, std::uint64_t* flops) {
  using ST = scalar_traits<T>;
  for (index_t k = 0; k < d; ++k) {
    T piv = w(k, k);
    const double apiv = static_cast<double>(ST::abs(piv));
    if (apiv < pert || apiv == 0.0) {
      if (!opts.perturb_pivots)
        throw SingularError("factorize: singular pivot", global_col0 + k);
      piv = (apiv == 0.0) ? T(pert) : piv * T(pert / apiv);
      w(k, k) = piv;
      perturbed.push_back(global_col0 + k);
    }
    for (index_t i = k + 1; i < d; ++i) {
      w(i, k) = w(i, k) / piv;
      if (flops) *flops += 1;
    }
    for (index_t j = k + 1; j < d; ++j) {
      const T ukj = w(k, j);
      for (index_t i = k + 1; i < d; ++i) {
        w(i, j) -= w(i, k) * ukj;
        if (flops) *flops += 2;
      }
    }
  }
}

/// Block lists are kept ascending by block index, so lookups can bisect.
template <class T>
const LUBlock<T>* find_block(const std::vector<LUBlock<T>>& blocks, index_t b) {
  auto it = std::lower_bound(
      blocks.begin(), blocks.end(), b,
      [](const LUBlock<T>& x, index_t y) { return x.block < y; });
  return (it != blocks.end() && it->block == b) ? &*it : nullptr;
}

template <class T>
double inf_norm(const CscMatrix<T>& a) {
  using ST = scalar_traits<T>;
  std::vector<double> rowsum(a.n_rows, 0.0);
  for (index_t k = 0; k < a.nnz(); ++k)
    rowsum[a.row_idx[k]] += static_cast<double>(ST::abs(a.values[k]));
  double m = 0;
  for (double v : rowsum) m = std::max(m, v);
  return m;
}

}  // namespace detail

/// Left-looking supernodal LU of the (already permuted) matrix. No dynamic
/// pivoting; tiny pivots either raise SingularError or, with
/// opts.perturb_pivots, are replaced by a phase-preserving perturbation.
template <class T>
LUFactors<T> factorize(const CscMatrix<T>& at, const SupernodePartition& part,
                       const FillPattern& fill, const FactorOptions& opts = {},
                       Permutation row_perm = {}, Permutation col_perm = {}) {
  if (at.n_rows != at.n_cols || part.n() != at.n_cols)
    throw std::invalid_argument("factorize: inconsistent inputs");
  const index_t n = at.n_cols;
  const index_t ns = part.count();

  LUFactors<T> fac;
  fac.part = part;
  fac.fill = fill;
  fac.n = n;
  fac.row_perm = row_perm.size() == n ? std::move(row_perm) : Permutation::identity(n);
  fac.col_perm = col_perm.size() == n ? std::move(col_perm) : Permutation::identity(n);
  fac.snodes.resize(ns);

  const double pert_threshold =
      opts.perturb_pivots
          ? (opts.pivot_threshold > 0 ? opts.pivot_threshold
                                      : std::sqrt(std::numeric_limits<double>::epsilon()) *
                                            detail::inf_norm(at))
          : 0.0;

  const CscMatrix<T> a_t = at.transposed();  // row access for U assembly

  // updaters[k]: descendants J < k whose block set contains k
  std::vector<std::vector<index_t>> updaters(ns);
  for (index_t j = 0; j < ns; ++j)
    for (const auto& b : fill.l_blocks[j]) updaters[b.block].push_back(j);

  std::vector<index_t> rowmap(n, -1), colmap(n, -1);
  std::uint64_t* fl = &fac.flops.factor_flops;

  for (index_t k = 0; k < ns; ++k) {
    const index_t s = part.begin(k), e = part.end(k), d = part.size(k);
    auto& sn = fac.snodes[k];

    // storage rows: panel columns then the below-panel rows of C_L(k)
    std::vector<index_t> below;
    for (const auto& b : fill.l_blocks[k])
      below.insert(below.end(), b.indices.begin(), b.indices.end());
    const index_t nb = static_cast<index_t>(below.size());
    for (index_t c = s; c < e; ++c) rowmap[c] = c - s;
    for (index_t i = 0; i < nb; ++i) rowmap[below[i]] = d + i;

    // storage cols of the U panel (beyond the diagonal block)
    std::vector<index_t> right;
    for (const auto& b : fill.u_blocks[k])
      right.insert(right.end(), b.indices.begin(), b.indices.end());
    const index_t nr = static_cast<index_t>(right.size());
    for (index_t i = 0; i < nr; ++i) colmap[right[i]] = i;

    DenseBlock<T> wl(d + nb, d);  // diagonal block and L panel
    DenseBlock<T> wu(d, nr);      // U panel beyond the diagonal block

    for (index_t c = s; c < e; ++c) {
      for (index_t p = at.col_ptr[c]; p < at.col_ptr[c + 1]; ++p) {
        const index_t r = at.row_idx[p];
        if (r < s) continue;  // belongs to an earlier supernode's U panel
        if (rowmap[r] < 0)
          throw std::logic_error("factorize: entry outside symbolic structure");
        wl(rowmap[r], c - s) = at.values[p];
      }
      // row c of A~ (columns beyond the panel) via the transpose
      for (index_t p = a_t.col_ptr[c]; p < a_t.col_ptr[c + 1]; ++p) {
        const index_t cc = a_t.row_idx[p];
        if (cc < e) continue;
        if (colmap[cc] < 0)
          throw std::logic_error("factorize: entry outside symbolic structure");
        wu(c - s, colmap[cc]) = a_t.values[p];
      }
    }

    // accumulate updates from descendants
    DenseBlock<T> prod;
    for (index_t j : updaters[k]) {
      const auto& dj = fac.snodes[j];
      const LUBlock<T>* ujk_data = detail::find_block(dj.u_blocks, k);
      const LUBlock<T>* ljk_data = detail::find_block(dj.l_blocks, k);

      if (ujk_data) {
        // L_{I,j} * U_{j,k} -> block column k (I >= k)
        auto lb_it = std::lower_bound(
            dj.l_blocks.begin(), dj.l_blocks.end(), k,
            [](const LUBlock<T>& x, index_t y) { return x.block < y; });
        for (; lb_it != dj.l_blocks.end(); ++lb_it) {
          const auto& lb = *lb_it;
          prod.resize(lb.data.rows(), ujk_data->data.cols());
          dense_gemm(T{1}, lb.data, false, ujk_data->data, false, T{0}, prod, fl);
          for (index_t cj = 0; cj < prod.cols(); ++cj) {
            const index_t gc = ujk_data->idx[cj];
            for (index_t ri = 0; ri < prod.rows(); ++ri)
              wl(rowmap[lb.idx[ri]], gc - s) -= prod(ri, cj);
          }
        }
      }
      if (ljk_data) {
        // L_{k,j} * U_{j,J'} -> block row k (J' > k)
        auto ub_it = std::lower_bound(
            dj.u_blocks.begin(), dj.u_blocks.end(), k + 1,
            [](const LUBlock<T>& x, index_t y) { return x.block < y; });
        for (; ub_it != dj.u_blocks.end(); ++ub_it) {
          const auto& ub = *ub_it;
          prod.resize(ljk_data->data.rows(), ub.data.cols());
          dense_gemm(T{1}, ljk_data->data, false, ub.data, false, T{0}, prod, fl);
          for (index_t cj = 0; cj < prod.cols(); ++cj) {
            const index_t gc = ub.idx[cj];
            for (index_t ri = 0; ri < prod.rows(); ++ri)
              wu(ljk_data->idx[ri] - s, colmap[gc]) -= prod(ri, cj);
          }
        }
      }
    }

    // factor the diagonal block in place (packed unit-L \ U)
    detail::dense_lu_packed(wl, d, s, opts, pert_threshold, fac.perturbed_pivots, fl);
    sn.diag.resize(d, d);
    for (index_t j = 0; j < d; ++j)
      for (index_t i = 0; i < d; ++i) sn.diag(i, j) = wl(i, j);

    // L_{I,k} <- W_lower * U_{k,k}^{-1}, U_{k,J} <- L_{k,k}^{-1} * W_right
    if (nb > 0) {
      DenseBlock<T> lower(nb, d);
      for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < nb; ++i) lower(i, j) = wl(d + i, j);
      dense_trsm(sn.diag, Side::Right, UpLo::Upper, false, false, lower, fl);
      index_t off = 0;
      for (const auto& b : fill.l_blocks[k]) {
        LUBlock<T> lb;
        lb.block = b.block;
        lb.idx = b.indices;
        lb.data.resize(static_cast<index_t>(b.indices.size()), d);
        for (index_t j = 0; j < d; ++j)
          for (index_t i = 0; i < lb.data.rows(); ++i) lb.data(i, j) = lower(off + i, j);
        off += lb.data.rows();
        sn.l_blocks.push_back(std::move(lb));
      }
    }
    if (nr > 0) {
      dense_trsm(sn.diag, Side::Left, UpLo::Lower, false, true, wu, fl);
      index_t off = 0;
      for (const auto& b : fill.u_blocks[k]) {
        LUBlock<T> ub;
        ub.block = b.block;
        ub.idx = b.indices;
        ub.data.resize(d, static_cast<index_t>(b.indices.size()));
        for (index_t j = 0; j < ub.data.cols(); ++j)
          for (index_t i = 0; i < d; ++i) ub.data(i, j) = wu(i, off + j);
        off += ub.data.cols();
        sn.u_blocks.push_back(std::move(ub));
      }
    }

    for (index_t c = s; c < e; ++c) rowmap[c] = -1;
    for (index_t r : below) rowmap[r] = -1;
    for (index_t c : right) colmap[c] = -1;
  }
  fac.state = FactorState::Factored;
  return fac;
}

/// Alg.: L^_{I,K} = L_{I,K} (L_{K,K})^{-1} and U^_{K,J} = (U_{K,K})^{-1} U_{K,J},
/// overwriting the factors in place. Diagonal blocks are unchanged.
template <class T>
void normalize(LUFactors<T>& fac) {
  if (fac.state != FactorState::Factored)
    throw std::logic_error("normalize: factors not in state 'factored'");
  std::uint64_t* fl = &fac.flops.selinv_flops;
  for (auto& sn : fac.snodes) {
    for (auto& lb : sn.l_blocks)
      dense_trsm(sn.diag, Side::Right, UpLo::Lower, false, true, lb.data, fl);
    for (auto& ub : sn.u_blocks)
      dense_trsm(sn.diag, Side::Left, UpLo::Upper, false, false, ub.data, fl);
  }
  fac.state = FactorState::Normalized;
}

/// Solves A~ x = b by forward/back substitution over the supernodal blocks.
template <class T>
std::vector<T> lu_solve(const LUFactors<T>& fac, std::vector<T> b) {
  if (fac.state != FactorState::Factored)
    throw std::logic_error("lu_solve: factors not in state 'factored'");
  if (static_cast<index_t>(b.size()) != fac.n)
    throw std::invalid_argument("lu_solve: size mismatch");
  const auto& part = fac.part;
  // forward: y = L^{-1} b
  for (index_t k = 0; k < part.count(); ++k) {
    const index_t s = part.begin(k), d = part.size(k);
    const auto& sn = fac.snodes[k];
    DenseBlock<T> y(d, 1);
    for (index_t i = 0; i < d; ++i) y(i, 0) = b[s + i];
    dense_trsm(sn.diag, Side::Left, UpLo::Lower, false, true, y);
    for (index_t i = 0; i < d; ++i) b[s + i] = y(i, 0);
    for (const auto& lb : sn.l_blocks) {
      for (index_t i = 0; i < lb.data.rows(); ++i) {
        T acc{};
        for (index_t j = 0; j < d; ++j) acc += lb.data(i, j) * y(j, 0);
        b[lb.idx[i]] -= acc;
      }
    }
  }
  // back: x = U^{-1} y
  for (index_t k = part.count() - 1; k >= 0; --k) {
    const index_t s = part.begin(k), d = part.size(k);
    const auto& sn = fac.snodes[k];
    DenseBlock<T> y(d, 1);
    for (index_t i = 0; i < d; ++i) y(i, 0) = b[s + i];
    for (const auto& ub : sn.u_blocks)
      for (index_t j = 0; j < ub.data.cols(); ++j) {
        const T xv = b[ub.idx[j]];
        for (index_t i = 0; i < d; ++i) y(i, 0) -= ub.data(i, j) * xv;
      }
    dense_trsm(sn.diag, Side::Left, UpLo::Upper, false, false, y);
    for (index_t i = 0; i < d; ++i) b[s + i] = y(i, 0);
  }
  return b;
}

template <class T>
FlopCounter flop_report(const LUFactors<T>& fac) {
  return fac.flops;
}

}  // namespace selinv
