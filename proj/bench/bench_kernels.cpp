// Serial vs OpenMP kernels: the pool admission scan and batch IR fits.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "aloe/common/random.hpp"
#include "aloe/gateway/similarity.hpp"
#include "aloe/metrics/metrics.hpp"

namespace {

constexpr std::size_t kDim = 1536;  // text-embedding-3-small width

std::vector<double> unit_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  aloe::Rng rng(seed);
  std::vector<double> m(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = rng.uniform() - 0.5;
      m[i * dim + j] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] /= norm;
  }
  return m;
}

template <auto Kernel>
void max_dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rows = unit_rows(n, kDim, 1);
  const auto query = unit_rows(1, kDim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(rows, kDim, query));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <auto Kernel>
void fit_batch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t turns = 10;
  aloe::Rng rng(3);
  std::vector<double> curves(n * turns);
  for (auto& v : curves) v = 1.0 + 4.0 * rng.uniform();
  std::vector<aloe::metrics::RegressionFit> out(n);
  for (auto _ : state) {
    Kernel(curves, turns, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

}  // namespace

BENCHMARK(max_dot<aloe::gateway::kernels::max_dot_serial>)->Name("max_dot/serial")->Range(256, 16384);
BENCHMARK(max_dot<aloe::gateway::kernels::max_dot_parallel>)->Name("max_dot/parallel")->Range(256, 16384);
BENCHMARK(fit_batch<aloe::metrics::kernels::fit_ir_batch_serial>)->Name("fit_ir_batch/serial")->Range(1024, 1 << 18);
BENCHMARK(fit_batch<aloe::metrics::kernels::fit_ir_batch_parallel>)->Name("fit_ir_batch/parallel")->Range(1024, 1 << 18);

BENCHMARK_MAIN();
