#pragma once

#include "selinv/factor.hpp"
#include "selinv/matrix_market.hpp"
#include "selinv/selinv.hpp"
#include "selinv/symbolic.hpp"

namespace selinv {

enum class Ordering { Natural, MinDegree, External };

struct PipelineOptions {
  Ordering ordering = Ordering::MinDegree;
  Permutation external_order;  // used when ordering == External
  RelaxParams relax;
  FactorOptions factor;
  // extra row/col permutations applied before analysis (identity when empty)
  Permutation pre_row_perm;
  Permutation pre_col_perm;
};

template <class T>
struct Pipeline {
  CscMatrix<T> permuted;  // A~ = (ordering o pre) applied to A
  Permutation order;      // fill-reducing (symmetric) part only
  SupernodePartition part;
  FillPattern fill;
  EliminationTree etree;
  LUFactors<T> fac;       // total row/col perms from the original indexing
};

/// symmetrize -> order -> detect supernodes -> symbolic fill -> factorize.
/// Leaves fac in the factored state so residual checks can run before the
/// caller normalizes and inverts.
template <class T>
Pipeline<T> run_pipeline(const CscMatrix<T>& a, const PipelineOptions& opt = {}) {
  if (a.n_rows != a.n_cols) throw std::invalid_argument("run_pipeline: non-square matrix");
  const index_t n = a.n_cols;

  Permutation rp = opt.pre_row_perm.size() == n ? opt.pre_row_perm : Permutation::identity(n);
  Permutation cp = opt.pre_col_perm.size() == n ? opt.pre_col_perm : Permutation::identity(n);
  const bool pre = !rp.is_identity() || !cp.is_identity();
  CscMatrix<T> b = pre ? permute(a, rp, cp) : a;

  Pipeline<T> pl;
  SymPattern sp = symmetrize_pattern(b);
  switch (opt.ordering) {
    case Ordering::Natural:
      pl.order = Permutation::identity(n);
      break;
    case Ordering::MinDegree:
      pl.order = fill_reducing_order(sp);
      break;
    case Ordering::External:
      if (opt.external_order.size() != n)
        throw std::invalid_argument("run_pipeline: external ordering has wrong length");
      pl.order = opt.external_order;
      break;
  }

  pl.part = detect_supernodes(sp, pl.order, opt.relax);
  pl.fill = symbolic_factorize(sp, pl.order, pl.part);
  pl.etree = elimination_tree(pl.fill, pl.part);
  pl.permuted = pl.order.is_identity() ? std::move(b) : permute(b, pl.order, pl.order);

  std::vector<index_t> trp(n), tcp(n);
  for (index_t i = 0; i < n; ++i) {
    trp[i] = pl.order[rp[i]];
    tcp[i] = pl.order[cp[i]];
  }
  pl.fac = factorize(pl.permuted, pl.part, pl.fill, opt.factor,
                     Permutation(std::move(trp)), Permutation(std::move(tcp)));
  return pl;
}

}  // namespace selinv
