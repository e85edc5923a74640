#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <sstream>

#include "selinv/csc.hpp"
#include "selinv/dense.hpp"
#include "selinv/matrix_market.hpp"
#include "selinv/permutation.hpp"
#include "support/corpus.hpp"

using namespace selinv;

TEST_CASE("from_triplets sorts, deduplicates, bounds-checks") {
  auto a = CscMatrix<double>::from_triplets(
      3, 3, {{2, 0, 5.0}, {0, 0, 1.0}, {1, 2, 3.0}, {1, 2, 4.0}});
  CHECK(a.col_ptr == std::vector<index_t>{0, 2, 2, 3});
  CHECK(a.row_idx == std::vector<index_t>{0, 2, 1});
  CHECK(a.values == std::vector<double>{1.0, 5.0, 7.0});
  CHECK(a.at(1, 2) == 7.0);
  CHECK(a.at(2, 2) == 0.0);
  CHECK_THROWS_AS(CscMatrix<double>::from_triplets(2, 2, {{2, 0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("transpose round trip") {
  auto a = corpus::random_sparse<double>(25, 0.1, 42);
  auto att = a.transposed().transposed();
  CHECK(att == a);
  auto at = a.transposed();
  for (index_t j = 0; j < a.n_cols; ++j)
    for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p)
      CHECK(at.at(j, a.row_idx[p]) == a.values[p]);
}

TEST_CASE("permutation is a validated bijection with lazy inverse") {
  Permutation p(std::vector<index_t>{2, 0, 1});
  CHECK(p.inverse() == std::vector<index_t>{1, 2, 0});
  CHECK(p.inverted()[2] == 0);
  CHECK(Permutation::identity(4).is_identity());
  CHECK_THROWS_AS(Permutation(std::vector<index_t>{0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation(std::vector<index_t>{0, 3}), std::invalid_argument);
}

TEST_CASE("permute: identity, hand-checked swap, dense oracle") {
  auto a = CscMatrix<double>::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}});
  auto id = Permutation::identity(2);
  CHECK(permute(a, id, id) == a);

  // swapping rows of [[0,1],[2,0]] gives [[2,0],[0,1]]
  Permutation swap(std::vector<index_t>{1, 0});
  auto b = permute(a, swap, id);
  CHECK(b.at(0, 0) == 2.0);
  CHECK(b.at(1, 1) == 1.0);
  CHECK(b.at(0, 1) == 0.0);

  auto r = corpus::random_sparse<double>(18, 0.15, 7);
  auto p = corpus::random_perm(18, 1);
  auto q = corpus::random_perm(18, 2);
  auto pr = permute(r, p, q);
  for (index_t j = 0; j < 18; ++j)
    for (index_t i = 0; i < 18; ++i) CHECK(pr.at(p[i], q[j]) == r.at(i, j));
}

TEST_CASE("matrix market read: general, symmetric, pattern, errors") {
  std::istringstream gen(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 4\n1 1 4\n2 1 2\n1 2 1\n2 2 3\n");
  auto a = mm_read<double>(gen);
  CHECK(a.col_ptr == std::vector<index_t>{0, 2, 4});
  CHECK(a.at(0, 0) == 4.0);
  CHECK(a.at(1, 0) == 2.0);

  std::istringstream sym(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n1 1 2\n2 1 1\n");
  auto s = mm_read<double>(sym);
  CHECK(s.nnz() == 3);
  CHECK(s.at(0, 1) == 1.0);

  std::istringstream pat(
      "%%MatrixMarket matrix coordinate pattern general\n"
      "% comment line\n"
      "2 2 1\n2 1\n");
  CHECK(mm_read<double>(pat).at(1, 0) == 1.0);

  std::istringstream oob(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 1\n5 1 1.0\n");
  CHECK_THROWS_WITH_AS(mm_read<double>(oob), "mm_read: index out of bounds at line 3",
                       ParseError);

  std::istringstream badfmt("%%MatrixMarket matrix array real general\n2 2 4\n");
  CHECK_THROWS_AS(mm_read<double>(badfmt), ParseError);

  std::istringstream cplx(
      "%%MatrixMarket matrix coordinate complex general\n"
      "1 1 1\n1 1 2.0 3.0\n");
  auto z = mm_read<std::complex<double>>(cplx);
  CHECK(z.at(0, 0) == std::complex<double>(2.0, 3.0));

  std::istringstream cplx2(
      "%%MatrixMarket matrix coordinate complex general\n"
      "1 1 1\n1 1 2.0 3.0\n");
  CHECK_THROWS_AS(mm_read<double>(cplx2), ParseError);
}

TEST_CASE("matrix market round trip, including empty and complex") {
  auto check_rt = [](const auto& a) {
    std::ostringstream os;
    mm_write(a, os);
    std::istringstream is(os.str());
    using M = std::decay_t<decltype(a)>;
    M b = mm_read<typename decltype(a.values)::value_type>(is);
    CHECK(b == a);
  };
  check_rt(corpus::random_sparse<double>(30, 0.1, 99));
  check_rt(corpus::random_sparse<std::complex<double>>(12, 0.2, 100));
  check_rt(CscMatrix<double>::from_triplets(3, 4, {}));
  check_rt(CscMatrix<double>::identity(3));
}

TEST_CASE("dense_gemm: identity, scalar case, naive oracle to the last bit") {
  DenseBlock<double> i2 = DenseBlock<double>::identity(2);
  DenseBlock<double> y(2, 3);
  corpus::Rng rng(5);
  for (auto& v : y.data()) v = rng.symm();
  DenseBlock<double> z(2, 3);
  dense_gemm(1.0, i2, false, y, false, 0.0, z);
  CHECK(z == y);

  DenseBlock<double> x1(1, 1, 3.0), y1(1, 1, 5.0), z1(1, 1, 1.0);
  dense_gemm(2.0, x1, false, y1, false, 1.0, z1);
  CHECK(z1(0, 0) == 31.0);

  DenseBlock<double> a(4, 3), b(3, 5), c(4, 5), ref(4, 5);
  for (auto& v : a.data()) v = rng.symm();
  for (auto& v : b.data()) v = rng.symm();
  dense_gemm(1.0, a, false, b, false, 0.0, c);
  for (index_t j = 0; j < 5; ++j)
    for (index_t i = 0; i < 4; ++i) {
      double acc = 0;
      for (index_t l = 0; l < 3; ++l) acc += a(i, l) * b(l, j);
      ref(i, j) = acc;
    }
  CHECK(c == ref);  // bitwise

  // transposed operands against the same oracle
  DenseBlock<double> ct(5, 4);
  dense_gemm(1.0, b, true, a, true, 0.0, ct);
  for (index_t j = 0; j < 4; ++j)
    for (index_t i = 0; i < 5; ++i) CHECK(ct(i, j) == ref(j, i));

  std::uint64_t fl = 0;
  dense_gemm(1.0, a, false, b, false, 0.0, c, &fl);
  CHECK(fl == 2ull * 4 * 5 * 3);
}

TEST_CASE("dense_trsm: hand cases, all side/uplo/trans combinations by residual") {
  DenseBlock<double> t(2, 2);
  t(0, 0) = 2;
  t(1, 0) = 1;
  t(1, 1) = 1;
  DenseBlock<double> b(2, 1);
  b(0, 0) = 2;
  b(1, 0) = 3;
  dense_trsm(t, Side::Left, UpLo::Lower, false, false, b);
  CHECK(b(0, 0) == doctest::Approx(1.0));
  CHECK(b(1, 0) == doctest::Approx(2.0));

  corpus::Rng rng(11);
  DenseBlock<double> tri(4, 4);
  for (index_t j = 0; j < 4; ++j) {
    for (index_t i = j + 1; i < 4; ++i) tri(i, j) = rng.symm();
    tri(j, j) = 2.0 + rng.uniform();
  }
  for (Side side : {Side::Left, Side::Right}) {
    for (bool trans : {false, true}) {
      for (bool unit : {false, true}) {
        DenseBlock<double> rhs(side == Side::Left ? 4 : 3, side == Side::Left ? 3 : 4);
        for (auto& v : rhs.data()) v = rng.symm();
        DenseBlock<double> x = rhs;
        dense_trsm(tri, side, UpLo::Lower, trans, unit, x);
        // multiply back: op(T) with unit handling
        DenseBlock<double> op(4, 4);
        for (index_t j = 0; j < 4; ++j)
          for (index_t i = 0; i < 4; ++i) {
            double v = trans ? tri(j, i) : tri(i, j);
            if (i == j && unit) v = 1.0;
            if ((i < j) != trans && i != j) v = 0.0;
            op(i, j) = v;
          }
        DenseBlock<double> back(rhs.rows(), rhs.cols());
        if (side == Side::Left)
          dense_gemm(1.0, op, false, x, false, 0.0, back);
        else
          dense_gemm(1.0, x, false, op, false, 0.0, back);
        for (index_t k = 0; k < static_cast<index_t>(rhs.data().size()); ++k)
          CHECK(back.data()[k] == doctest::Approx(rhs.data()[k]).epsilon(1e-12));
      }
    }
  }

  DenseBlock<double> sing(2, 2);
  sing(1, 0) = 1.0;  // zero diagonal
  DenseBlock<double> rhs(2, 1, 1.0);
  CHECK_THROWS_AS(dense_trsm(sing, Side::Left, UpLo::Lower, false, false, rhs),
                  SingularError);
}

TEST_CASE("dense_gemm supports complex scalars") {
  using C = std::complex<double>;
  DenseBlock<C> x(1, 1, C(0, 1)), y(1, 1, C(0, 1)), z(1, 1);
  dense_gemm(C(1), x, false, y, false, C(0), z);
  CHECK(z(0, 0) == C(-1, 0));
}
