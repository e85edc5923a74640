#pragma once

#include <cassert>
#include <vector>

#include "selinv/common.hpp"

namespace selinv {

/// Column-major dense block.
template <class T>
class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(index_t rows, index_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }

  T& operator()(index_t i, index_t j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(j) * rows_ + i];
  }
  T operator()(index_t i, index_t j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(j) * rows_ + i];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void set_zero() { data_.assign(data_.size(), T{}); }

  void resize(index_t rows, index_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<std::size_t>(rows) * cols, T{});
  }

  bool operator==(const DenseBlock& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  static DenseBlock identity(index_t n) {
    DenseBlock b(n, n);
    for (index_t i = 0; i < n; ++i) b(i, i) = T{1};
    return b;
  }

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<T> data_;
};

enum class Side { Left, Right };
enum class UpLo { Lower, Upper };

/// Z <- alpha * op(X) * op(Y) + beta * Z.
/// The loop nest is fixed (dot-product accumulation over the inner index in
/// ascending order) so results are bitwise reproducible.
template <class T>
void dense_gemm(T alpha, const DenseBlock<T>& x, bool trans_x, const DenseBlock<T>& y,
                bool trans_y, T beta, DenseBlock<T>& z, std::uint64_t* flops = nullptr) {
  const index_t m = trans_x ? x.cols() : x.rows();
  const index_t k = trans_x ? x.rows() : x.cols();
  const index_t ky = trans_y ? y.cols() : y.rows();
  const index_t n = trans_y ? y.rows() : y.cols();
  if (k != ky || z.rows() != m || z.cols() != n)
    throw std::invalid_argument("dense_gemm: dimension mismatch");

  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < m; ++i) {
      T acc{};
      for (index_t l = 0; l < k; ++l) {
        const T xv = trans_x ? x(l, i) : x(i, l);
        const T yv = trans_y ? y(j, l) : y(l, j);
        acc += xv * yv;
      }
      z(i, j) = alpha * acc + beta * z(i, j);
    }
  }
  if (flops) *flops += 2ull * m * n * k;
}

/// Triangular solve with a square triangular block T0:
///   side=Left:  B <- op(T0)^{-1} B
///   side=Right: B <- B op(T0)^{-1}
/// unit_diag treats the diagonal of T0 as implicit ones.
template <class T>
void dense_trsm(const DenseBlock<T>& t, Side side, UpLo uplo, bool trans_t, bool unit_diag,
                DenseBlock<T>& b, std::uint64_t* flops = nullptr) {
  const index_t n = t.rows();
  if (t.cols() != n) throw std::invalid_argument("dense_trsm: T not square");
  if ((side == Side::Left && b.rows() != n) || (side == Side::Right && b.cols() != n))
    throw std::invalid_argument("dense_trsm: dimension mismatch");

  using ST = scalar_traits<T>;
  auto diag = [&](index_t i) -> T {
    T d = t(i, i);
    if (!unit_diag && ST::abs(d) == typename ST::real_type{0})
      throw SingularError("dense_trsm: zero diagonal", i);
    return d;
  };
  // Effective entry of op(T0).
  auto at = [&](index_t i, index_t j) -> T { return trans_t ? t(j, i) : t(i, j); };
  // Is op(T0) lower triangular?
  const bool eff_lower = (uplo == UpLo::Lower) != trans_t;

  const index_t nrhs = (side == Side::Left) ? b.cols() : b.rows();

  if (side == Side::Left) {
    for (index_t c = 0; c < nrhs; ++c) {
      if (eff_lower) {
        for (index_t i = 0; i < n; ++i) {
          T acc = b(i, c);
          for (index_t l = 0; l < i; ++l) acc -= at(i, l) * b(l, c);
          b(i, c) = unit_diag ? acc : acc / diag(i);
        }
      } else {
        for (index_t i = n - 1; i >= 0; --i) {
          T acc = b(i, c);
          for (index_t l = i + 1; l < n; ++l) acc -= at(i, l) * b(l, c);
          b(i, c) = unit_diag ? acc : acc / diag(i);
        }
      }
    }
  } else {
    // B op(T0)^{-1}: solve column by column of op(T0) in the appropriate order.
    for (index_t r = 0; r < nrhs; ++r) {
      if (eff_lower) {
        // x L = b  => process columns from last to first
        for (index_t j = n - 1; j >= 0; --j) {
          T acc = b(r, j);
          for (index_t l = j + 1; l < n; ++l) acc -= b(r, l) * at(l, j);
          b(r, j) = unit_diag ? acc : acc / diag(j);
        }
      } else {
        for (index_t j = 0; j < n; ++j) {
          T acc = b(r, j);
          for (index_t l = 0; l < j; ++l) acc -= b(r, l) * at(l, j);
          b(r, j) = unit_diag ? acc : acc / diag(j);
        }
      }
    }
  }
  if (flops) {
    // n(n-1)/2 mul-adds per rhs plus one division per row when non-unit.
    std::uint64_t muladds = static_cast<std::uint64_t>(n) * (n - 1) / 2 * nrhs;
    std::uint64_t divs = unit_diag ? 0ull : static_cast<std::uint64_t>(n) * nrhs;
    *flops += 2 * muladds + divs;
  }
}

}  // namespace selinv
