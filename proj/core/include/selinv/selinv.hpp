#pragma once

#include <string>
#include <vector>

#include "selinv/factor.hpp"

namespace selinv {

namespace detail {

/// Positions of each element of sub within super (both strictly ascending).
inline void positions_in(const std::vector<index_t>& sub, const std::vector<index_t>& super,
                         std::vector<index_t>& out) {
  out.clear();
  out.reserve(sub.size());
  auto lo = super.begin();
  for (index_t v : sub) {
    lo = std::lower_bound(lo, super.end(), v);
    if (lo == super.end() || *lo != v)
      throw std::logic_error("selected inversion: index outside stored structure");
    out.push_back(static_cast<index_t>(lo - super.begin()));
    ++lo;
  }
}

/// (L_KK)^{-T} (U_KK)^{-T} from the packed diagonal block.
template <class T>
DenseBlock<T> diag_inv_transpose(const DenseBlock<T>& packed, std::uint64_t* flops) {
  DenseBlock<T> x = DenseBlock<T>::identity(packed.rows());
  dense_trsm(packed, Side::Left, UpLo::Upper, true, false, x, flops);  // U^{-T}
  dense_trsm(packed, Side::Left, UpLo::Lower, true, true, x, flops);   // L^{-T}
  return x;
}

}  // namespace detail

/// Selected inversion over the normalized factors, supernodes in descending
/// order, overwriting L, U and the diagonal blocks with the corresponding
/// blocks of A~^{-T} in situ. With crosscheck enabled, the diagonal update is
/// also evaluated through the L-panel identity and the per-supernode maximum
/// deviation between the two expressions is recorded.
template <class T>
void selected_inversion(LUFactors<T>& fac, bool diag_crosscheck = false) {
  if (fac.state != FactorState::Normalized)
    throw std::logic_error("selected_inversion: factors must be normalized first");
  std::uint64_t* fl = &fac.flops.selinv_flops;
  const auto& part = fac.part;
  fac.diag_crosscheck.assign(diag_crosscheck ? part.count() : 0, 0.0);
  fac.peak_gather_elems = 0;

  DenseBlock<T> y, lhat, uhat, xu, xl;
  std::vector<index_t> ext, pos_r, pos_c;

  for (index_t k = part.count() - 1; k >= 0; --k) {
    auto& sn = fac.snodes[k];
    const index_t d = part.size(k);

    DenseBlock<T> dinv = detail::diag_inv_transpose(sn.diag, fl);

    ext.clear();
    for (const auto& lb : sn.l_blocks) ext.insert(ext.end(), lb.idx.begin(), lb.idx.end());
    const index_t nb = static_cast<index_t>(ext.size());
    if (nb == 0) {
      sn.diag = std::move(dinv);
      continue;
    }
    fac.peak_gather_elems =
        std::max(fac.peak_gather_elems, static_cast<std::size_t>(nb) * nb);

    // gather Y = A~^{-T} restricted to the supernode's outer structure;
    // every block lands inside an already inverted ancestor
    y.resize(nb, nb);
    index_t roff = 0;
    for (const auto& rb : sn.l_blocks) {
      const index_t bi = rb.block, bs = part.begin(bi);
      index_t coff = 0;
      for (const auto& cb : sn.u_blocks) {
        const index_t bj = cb.block;
        if (bi == bj) {
          const auto& dsrc = fac.snodes[bi].diag;
          for (index_t cj = 0; cj < static_cast<index_t>(cb.idx.size()); ++cj)
            for (index_t ri = 0; ri < static_cast<index_t>(rb.idx.size()); ++ri)
              y(roff + ri, coff + cj) = dsrc(rb.idx[ri] - bs, cb.idx[cj] - bs);
        } else if (bi > bj) {
          const LUBlock<T>* src = detail::find_block(fac.snodes[bj].l_blocks, bi);
          if (!src) throw std::logic_error("selected inversion: missing ancestor L block");
          detail::positions_in(rb.idx, src->idx, pos_r);
          const index_t cs = part.begin(bj);
          for (index_t cj = 0; cj < static_cast<index_t>(cb.idx.size()); ++cj)
            for (index_t ri = 0; ri < static_cast<index_t>(rb.idx.size()); ++ri)
              y(roff + ri, coff + cj) = src->data(pos_r[ri], cb.idx[cj] - cs);
        } else {
          const LUBlock<T>* src = detail::find_block(fac.snodes[bi].u_blocks, bj);
          if (!src) throw std::logic_error("selected inversion: missing ancestor U block");
          detail::positions_in(cb.idx, src->idx, pos_c);
          for (index_t cj = 0; cj < static_cast<index_t>(cb.idx.size()); ++cj)
            for (index_t ri = 0; ri < static_cast<index_t>(rb.idx.size()); ++ri)
              y(roff + ri, coff + cj) = src->data(rb.idx[ri] - bs, pos_c[cj]);
        }
        coff += static_cast<index_t>(cb.idx.size());
      }
      roff += static_cast<index_t>(rb.idx.size());
    }

    // stack the normalized panels
    lhat.resize(nb, d);
    roff = 0;
    for (const auto& lb : sn.l_blocks) {
      for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < lb.data.rows(); ++i) lhat(roff + i, j) = lb.data(i, j);
      roff += lb.data.rows();
    }
    uhat.resize(d, nb);
    index_t coff = 0;
    for (const auto& ub : sn.u_blocks) {
      for (index_t j = 0; j < ub.data.cols(); ++j)
        for (index_t i = 0; i < d; ++i) uhat(i, coff + j) = ub.data(i, j);
      coff += ub.data.cols();
    }

    // new U panel: A~^{-T}_{K,C} = -L^^T Y
    xu.resize(d, nb);
    dense_gemm(T{-1}, lhat, true, y, false, T{0}, xu, fl);
    // new L panel: A~^{-T}_{C,K} = -Y U^^T
    xl.resize(nb, d);
    dense_gemm(T{-1}, y, false, uhat, true, T{0}, xl, fl);

    DenseBlock<T> diag_new = dinv;
    dense_gemm(T{-1}, xu, false, uhat, true, T{1}, diag_new, fl);

    if (diag_crosscheck) {
      // same diagonal through the L-panel route (used by the parallel schedule)
      DenseBlock<T> alt = dinv;
      dense_gemm(T{-1}, lhat, true, xl, false, T{1}, alt);
      double dev = 0;
      for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < d; ++i)
          dev = std::max(dev, static_cast<double>(
                                  scalar_traits<T>::abs(alt(i, j) - diag_new(i, j))));
      fac.diag_crosscheck[k] = dev;
    }

    sn.diag = std::move(diag_new);
    coff = 0;
    for (auto& ub : sn.u_blocks) {
      for (index_t j = 0; j < ub.data.cols(); ++j)
        for (index_t i = 0; i < d; ++i) ub.data(i, j) = xu(i, coff + j);
      coff += ub.data.cols();
    }
    roff = 0;
    for (auto& lb : sn.l_blocks) {
      for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < lb.data.rows(); ++i) lb.data(i, j) = xl(roff + i, j);
      roff += lb.data.rows();
    }
  }
  fac.state = FactorState::Inverted;
}

/// Max deviation between the two diagonal-update formulas for supernode k;
/// requires selected_inversion to have run with the crosscheck enabled.
template <class T>
double diag_step_crosscheck(const LUFactors<T>& fac, index_t k) {
  if (fac.diag_crosscheck.empty())
    throw std::logic_error("diag_step_crosscheck: crosscheck data not recorded");
  return fac.diag_crosscheck.at(static_cast<std::size_t>(k));
}

/// A^{-1}(i, j) for original (unpermuted) indices; the entry must lie in the
/// stored structure of the inverted factors.
template <class T>
bool try_inv_entry(const LUFactors<T>& fac, index_t i, index_t j, T& out) {
  if (fac.state != FactorState::Inverted) return false;
  // A^{-1} = Q A~^{-1} P, so A^{-1}(i,j) = A~^{-T}(sigma(j), tau(i))
  const index_t r = fac.row_perm[j];
  const index_t c = fac.col_perm[i];
  const auto& part = fac.part;
  const index_t kr = part.col_to_snode[r], kc = part.col_to_snode[c];
  if (kr == kc) {
    out = fac.snodes[kr].diag(r - part.begin(kr), c - part.begin(kc));
    return true;
  }
  if (kr > kc) {
    for (const auto& lb : fac.snodes[kc].l_blocks) {
      if (lb.block != kr) continue;
      auto it = std::lower_bound(lb.idx.begin(), lb.idx.end(), r);
      if (it == lb.idx.end() || *it != r) return false;
      out = lb.data(static_cast<index_t>(it - lb.idx.begin()), c - part.begin(kc));
      return true;
    }
    return false;
  }
  for (const auto& ub : fac.snodes[kr].u_blocks) {
    if (ub.block != kc) continue;
    auto it = std::lower_bound(ub.idx.begin(), ub.idx.end(), c);
    if (it == ub.idx.end() || *it != c) return false;
    out = ub.data(r - part.begin(kr), static_cast<index_t>(it - ub.idx.begin()));
    return true;
  }
  return false;
}

template <class T>
T inv_entry(const LUFactors<T>& fac, index_t i, index_t j) {
  T v{};
  if (!try_inv_entry(fac, i, j, v))
    throw std::out_of_range("inv_entry: (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") not in the computed selection");
  return v;
}

/// Entries {A^{-1}(i, j) : A(j, i) != 0} as a sparse matrix with the
/// transposed pattern of A. Throws if any requested entry was not computed,
/// listing every missing position.
template <class T>
CscMatrix<T> extract_selected(const LUFactors<T>& fac, const CscMatrix<T>& a) {
  if (a.n_rows != fac.n || a.n_cols != fac.n)
    throw std::invalid_argument("extract_selected: size mismatch");
  std::vector<std::tuple<index_t, index_t, T>> trips;
  trips.reserve(a.row_idx.size());
  std::string missing;
  for (index_t jj = 0; jj < a.n_cols; ++jj) {
    for (index_t p = a.col_ptr[jj]; p < a.col_ptr[jj + 1]; ++p) {
      const index_t ii = a.row_idx[p];
      // A(ii, jj) != 0 selects A^{-1}(jj, ii)
      T v{};
      if (!try_inv_entry(fac, jj, ii, v)) {
        missing += " (" + std::to_string(jj) + "," + std::to_string(ii) + ")";
        continue;
      }
      trips.emplace_back(jj, ii, v);
    }
  }
  if (!missing.empty())
    throw std::out_of_range("extract_selected: entries not computed:" + missing);
  return CscMatrix<T>::from_triplets(fac.n, fac.n, std::move(trips));
}

/// trace(A^{-1} A) via the selected entries; equals n when everything is
/// consistent.
template <class T>
T trace_product(const LUFactors<T>& fac, const CscMatrix<T>& a) {
  T acc{};
  for (index_t j = 0; j < a.n_cols; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      acc += inv_entry(fac, j, a.row_idx[p]) * a.values[p];
  return acc;
}

}  // namespace selinv
