#pragma once

// Helpers to materialize supernodal factors densely for oracle comparisons.

#include <cmath>

#include "selinv/factor.hpp"
#include "selinv/verify.hpp"

namespace testsup {

using selinv::DenseBlock;
using selinv::index_t;
using selinv::LUFactors;

template <class T>
DenseBlock<T> dense_l(const LUFactors<T>& fac) {
  DenseBlock<T> l(fac.n, fac.n);
  for (index_t k = 0; k < fac.part.count(); ++k) {
    const index_t s = fac.part.begin(k), d = fac.part.size(k);
    const auto& sn = fac.snodes[k];
    for (index_t j = 0; j < d; ++j) {
      l(s + j, s + j) = T{1};
      for (index_t i = j + 1; i < d; ++i) l(s + i, s + j) = sn.diag(i, j);
    }
    for (const auto& lb : sn.l_blocks)
      for (index_t j = 0; j < d; ++j)
        for (index_t i = 0; i < lb.data.rows(); ++i) l(lb.idx[i], s + j) = lb.data(i, j);
  }
  return l;
}

template <class T>
DenseBlock<T> dense_u(const LUFactors<T>& fac) {
  DenseBlock<T> u(fac.n, fac.n);
  for (index_t k = 0; k < fac.part.count(); ++k) {
    const index_t s = fac.part.begin(k), d = fac.part.size(k);
    const auto& sn = fac.snodes[k];
    for (index_t j = 0; j < d; ++j)
      for (index_t i = 0; i <= j; ++i) u(s + i, s + j) = sn.diag(i, j);
    for (const auto& ub : sn.u_blocks)
      for (index_t j = 0; j < ub.data.cols(); ++j)
        for (index_t i = 0; i < d; ++i) u(s + i, ub.idx[j]) = ub.data(i, j);
  }
  return u;
}

template <class T>
double frob(const DenseBlock<T>& a) {
  double s = 0;
  for (const T& v : a.data()) {
    const double m = static_cast<double>(selinv::scalar_traits<T>::abs(v));
    s += m * m;
  }
  return std::sqrt(s);
}

template <class T>
double factor_residual_frob(const LUFactors<T>& fac, const selinv::CscMatrix<T>& atil) {
  DenseBlock<T> l = dense_l(fac), u = dense_u(fac);
  DenseBlock<T> lu(fac.n, fac.n);
  selinv::dense_gemm(T{1}, l, false, u, false, T{0}, lu);
  DenseBlock<T> ad = selinv::to_dense(atil);
  for (std::size_t i = 0; i < lu.data().size(); ++i) lu.data()[i] -= ad.data()[i];
  return frob(lu) / frob(ad);
}

}  // namespace testsup
