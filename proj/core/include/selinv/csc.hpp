#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "selinv/common.hpp"
#include "selinv/permutation.hpp"

namespace selinv {

/// Compressed sparse column matrix. Row indices are strictly increasing within
/// each column; no duplicate entries.
template <class T>
struct CscMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> col_ptr;  // length n_cols + 1
  std::vector<index_t> row_idx;
  std::vector<T> values;

  index_t nnz() const { return static_cast<index_t>(row_idx.size()); }

  static CscMatrix identity(index_t n) {
    CscMatrix a;
    a.n_rows = a.n_cols = n;
    a.col_ptr.resize(n + 1);
    a.row_idx.resize(n);
    a.values.assign(n, T{1});
    for (index_t j = 0; j <= n; ++j) a.col_ptr[j] = j;
    for (index_t j = 0; j < n; ++j) a.row_idx[j] = j;
    return a;
  }

  /// Builds from (row, col, value) triplets; duplicates are summed.
  static CscMatrix from_triplets(index_t n_rows, index_t n_cols,
                                 std::vector<std::tuple<index_t, index_t, T>> trips) {
    for (auto& [r, c, v] : trips) {
      if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
        throw std::invalid_argument("from_triplets: index out of bounds");
    }
    std::sort(trips.begin(), trips.end(), [](const auto& a, const auto& b) {
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<0>(a) < std::get<0>(b);
    });
    CscMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.col_ptr.assign(n_cols + 1, 0);
    for (std::size_t k = 0; k < trips.size(); ++k) {
      auto [r, c, v] = trips[k];
      if (k > 0 && std::get<0>(trips[k - 1]) == r && std::get<1>(trips[k - 1]) == c) {
        a.values.back() += v;  // duplicate: sum
        continue;
      }
      a.row_idx.push_back(r);
      a.values.push_back(v);
      a.col_ptr[c + 1]++;
    }
    for (index_t j = 0; j < n_cols; ++j) a.col_ptr[j + 1] += a.col_ptr[j];
    return a;
  }

  T at(index_t i, index_t j) const {
    auto b = row_idx.begin() + col_ptr[j], e = row_idx.begin() + col_ptr[j + 1];
    auto it = std::lower_bound(b, e, i);
    if (it != e && *it == i) return values[it - row_idx.begin()];
    return T{};
  }

  CscMatrix transposed() const {
    CscMatrix at;
    at.n_rows = n_cols;
    at.n_cols = n_rows;
    at.col_ptr.assign(n_rows + 1, 0);
    at.row_idx.resize(row_idx.size());
    at.values.resize(values.size());
    for (index_t r : row_idx) at.col_ptr[r + 1]++;
    for (index_t i = 0; i < n_rows; ++i) at.col_ptr[i + 1] += at.col_ptr[i];
    std::vector<index_t> next(at.col_ptr.begin(), at.col_ptr.end() - 1);
    for (index_t j = 0; j < n_cols; ++j) {
      for (index_t k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
        index_t pos = next[row_idx[k]]++;
        at.row_idx[pos] = j;
        at.values[pos] = values[k];
      }
    }
    return at;
  }

  bool operator==(const CscMatrix& o) const {
    return n_rows == o.n_rows && n_cols == o.n_cols && col_ptr == o.col_ptr &&
           row_idx == o.row_idx && values == o.values;
  }
};

/// Returns P·A·Q where row i of A lands on row P[i] and column j on column
/// Q[j]: out(P[i], Q[j]) = A(i, j).
template <class T>
CscMatrix<T> permute(const CscMatrix<T>& a, const Permutation& p, const Permutation& q) {
  if (p.size() != a.n_rows || q.size() != a.n_cols)
    throw std::invalid_argument("permute: size mismatch");
  CscMatrix<T> out;
  out.n_rows = a.n_rows;
  out.n_cols = a.n_cols;
  out.col_ptr.assign(a.n_cols + 1, 0);
  for (index_t j = 0; j < a.n_cols; ++j)
    out.col_ptr[q[j] + 1] = a.col_ptr[j + 1] - a.col_ptr[j];
  for (index_t j = 0; j < a.n_cols; ++j) out.col_ptr[j + 1] += out.col_ptr[j];
  out.row_idx.resize(a.row_idx.size());
  out.values.resize(a.values.size());
  std::vector<std::pair<index_t, T>> col;
  for (index_t j = 0; j < a.n_cols; ++j) {
    col.clear();
    for (index_t k = a.col_ptr[j]; k < a.col_ptr[j + 1]; ++k)
      col.emplace_back(p[a.row_idx[k]], a.values[k]);
    std::sort(col.begin(), col.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    index_t base = out.col_ptr[q[j]];
    for (std::size_t k = 0; k < col.size(); ++k) {
      out.row_idx[base + static_cast<index_t>(k)] = col[k].first;
      out.values[base + static_cast<index_t>(k)] = col[k].second;
    }
  }
  return out;
}

}  // namespace selinv
