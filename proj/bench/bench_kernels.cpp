#include <benchmark/benchmark.h>

#include <random>

#include "hhn/hybrid_graph.hpp"
#include "hhn/kernels.hpp"
#include "hhn/synth.hpp"

namespace {

hhn::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  hhn::DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = d(rng);
  return m;
}

template <hhn::DenseMatrix (*Fn)(const hhn::DenseMatrix&, const hhn::DenseMatrix&)>
void bm_square(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

void bm_build_graph(benchmark::State& state) {
  hhn::SynthSpec spec;
  spec.n_samples = 16;
  spec.n_test = 1;
  const auto data = hhn::generate_samples(spec);
  hhn::GraphConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(hhn::build_hybrid_graphs(data.train, cfg));
}

}  // namespace

BENCHMARK(bm_square<hhn::matmul>)->Arg(64)->Arg(256);
BENCHMARK(bm_square<hhn::serial::matmul>)->Arg(64)->Arg(256);
BENCHMARK(bm_square<hhn::matmul_tn>)->Arg(64)->Arg(256);
BENCHMARK(bm_square<hhn::serial::matmul_tn>)->Arg(64)->Arg(256);
BENCHMARK(bm_square<hhn::matmul_nt>)->Arg(64)->Arg(256);
BENCHMARK(bm_square<hhn::serial::matmul_nt>)->Arg(64)->Arg(256);
BENCHMARK(bm_build_graph);

BENCHMARK_MAIN();
