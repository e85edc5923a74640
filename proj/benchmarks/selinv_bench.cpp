#include <benchmark/benchmark.h>

#include "selinv/pipeline.hpp"
#include "selinv/pmatrix.hpp"

using namespace selinv;

namespace {

CscMatrix<double> grid5(index_t side) {
  const index_t n = side * side;
  std::vector<std::tuple<index_t, index_t, double>> trips;
  auto id = [side](index_t x, index_t y) { return y * side + x; };
  for (index_t y = 0; y < side; ++y)
    for (index_t x = 0; x < side; ++x) {
      const index_t c = id(x, y);
      trips.emplace_back(c, c, 4.0);
      if (x > 0) trips.emplace_back(c, id(x - 1, y), -1.0);
      if (x + 1 < side) trips.emplace_back(c, id(x + 1, y), -1.0);
      if (y > 0) trips.emplace_back(c, id(x, y - 1), -1.0);
      if (y + 1 < side) trips.emplace_back(c, id(x, y + 1), -1.0);
    }
  return CscMatrix<double>::from_triplets(n, n, std::move(trips));
}

void bm_factorize(benchmark::State& state) {
  const auto a = grid5(static_cast<index_t>(state.range(0)));
  for (auto _ : state) {
    auto pl = run_pipeline(a);
    benchmark::DoNotOptimize(pl.fac.flops.factor_flops);
  }
}
BENCHMARK(bm_factorize)->Arg(16)->Arg(32)->Arg(48);

void bm_selected_inversion(benchmark::State& state) {
  const auto a = grid5(static_cast<index_t>(state.range(0)));
  auto pl = run_pipeline(a);
  normalize(pl.fac);
  for (auto _ : state) {
    LUFactors<double> fac = pl.fac;
    selected_inversion(fac);
    benchmark::DoNotOptimize(fac.flops.selinv_flops);
  }
}
BENCHMARK(bm_selected_inversion)->Arg(16)->Arg(32)->Arg(48);

void bm_parallel_sim(benchmark::State& state) {
  const auto a = grid5(24);
  auto pl = run_pipeline(a);
  normalize(pl.fac);
  const auto prio = schedule_priorities(pl.etree);
  const int p = static_cast<int>(state.range(0));
  const ProcGrid g{p, p};
  for (auto _ : state) {
    auto pm = distribute(pl.fac, g);
    auto stats = parallel_selinv(pm, prio, SimOptions{});
    benchmark::DoNotOptimize(stats.total_messages);
  }
}
BENCHMARK(bm_parallel_sim)->Arg(1)->Arg(2)->Arg(4);

void bm_dense_gemm(benchmark::State& state) {
  const index_t n = static_cast<index_t>(state.range(0));
  DenseBlock<double> x(n, n), y(n, n), z(n, n);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < n; ++i) {
      x(i, j) = 1.0 / (1 + i + j);
      y(i, j) = 1.0 / (1 + 2 * i + j);
    }
  for (auto _ : state) {
    dense_gemm(1.0, x, false, y, false, 0.0, z);
    benchmark::DoNotOptimize(z.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * n * n * n);
}
BENCHMARK(bm_dense_gemm)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
