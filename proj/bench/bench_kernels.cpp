// Serial reference vs OpenMP kernels. Run with --benchmark_filter=<name> to narrow.

#include <benchmark/benchmark.h>

#include <random>

#include "basedlab/kernels.hpp"

using namespace basedlab;
namespace k = basedlab::kernels;

namespace {

Matrix uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

template <bool Parallel>
void BM_QuantizeRows(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix x = uniform(n, 256, 1);
  for (auto _ : state) {
    Matrix y = x;
    if constexpr (Parallel)
      k::parallel::quantize_rows(y, 256);
    else
      k::serial::quantize_rows(y, 256);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 256);
}

template <bool Parallel>
void BM_RowStddev(benchmark::State& state) {
  const Matrix x = uniform(state.range(0), 256, 2);
  for (auto _ : state) {
    auto s = Parallel ? k::parallel::row_stddev(x) : k::serial::row_stddev(x);
    benchmark::DoNotOptimize(s.data());
  }
}

template <bool Parallel>
void BM_MatVec(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix w = uniform(n, n, 3);
  std::vector<double> s(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
  for (auto _ : state) {
    auto out = Parallel ? k::parallel::mat_vec(w, s) : k::serial::mat_vec(w, s);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_Covariance(benchmark::State& state) {
  const Matrix rows = uniform(state.range(0), 32, 4);
  for (auto _ : state) {
    Matrix c = Parallel ? k::parallel::covariance(rows) : k::serial::covariance(rows);
    benchmark::DoNotOptimize(c.data());
  }
}

template <bool Parallel>
void BM_NearestHistory(benchmark::State& state) {
  const auto items = uniform(state.range(0), 16, 5);
  std::vector<k::History> peers;
  for (int p = 0; p < 64; ++p) peers.push_back(uniform(32, 16, 100 + static_cast<std::uint64_t>(p)));
  for (auto _ : state) {
    auto a = Parallel ? k::parallel::nearest_history(items, peers, k::Aggregate::Min, nullptr)
                      : k::serial::nearest_history(items, peers, k::Aggregate::Min, nullptr);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_QuantizeRows<false>)->Name("quantize_rows/serial")->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(BM_QuantizeRows<true>)->Name("quantize_rows/parallel")->Arg(64)->Arg(1024)->Arg(8192)->UseRealTime();
BENCHMARK(BM_RowStddev<false>)->Name("row_stddev/serial")->Arg(1024)->Arg(8192);
BENCHMARK(BM_RowStddev<true>)->Name("row_stddev/parallel")->Arg(1024)->Arg(8192)->UseRealTime();
BENCHMARK(BM_MatVec<false>)->Name("mat_vec/serial")->Arg(256)->Arg(2048);
BENCHMARK(BM_MatVec<true>)->Name("mat_vec/parallel")->Arg(256)->Arg(2048)->UseRealTime();
BENCHMARK(BM_Covariance<false>)->Name("covariance/serial")->Arg(1024)->Arg(16384);
BENCHMARK(BM_Covariance<true>)->Name("covariance/parallel")->Arg(1024)->Arg(16384)->UseRealTime();
BENCHMARK(BM_NearestHistory<false>)->Name("nearest_history/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_NearestHistory<true>)->Name("nearest_history/parallel")->Arg(256)->Arg(4096)->UseRealTime();

BENCHMARK_MAIN();
