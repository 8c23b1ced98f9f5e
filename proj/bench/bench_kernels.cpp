// Serial reference vs OpenMP kernels. Thread count comes from UDFT_THREADS or OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "udft/kernels.hpp"
#include "udft/parallel.hpp"

using namespace udft;

namespace {

MatrixF random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  MatrixF m(r, c);
  for (auto& v : m.values()) v = g(rng);
  return m;
}

// transfer-net layer 1 at batch size b: (b x d) * (N1 x d)^T
template <bool Parallel>
void BM_affine_nt(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(b, 512, 1);
  const auto w = random_matrix(1024, 512, 2);
  std::vector<float> bias(1024, 0.1f);
  MatrixF out(b, 1024);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::affine_nt(a, w, std::span<const float>(bias), out);
    else kernels::serial::affine_nt(a, w, std::span<const float>(bias), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b * 1024 * 512));
}

// weight gradient: dH^T * X
template <bool Parallel>
void BM_gemm_tn(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto dh = random_matrix(b, 1024, 3);
  const auto x = random_matrix(b, 512, 4);
  MatrixF out(1024, 512);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::gemm_tn(dh, x, out);
    else kernels::serial::gemm_tn(dh, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b * 1024 * 512));
}

// k-means assignment step: n points against k centroids in d = 256
template <bool Parallel>
void BM_nearest_centroid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(n, 256, 5);
  const auto c = matrix_cast<double>(random_matrix(100, 256, 6));
  const auto norms = kernels::row_sq_norms(c);
  std::vector<std::uint32_t> labels(n);
  std::vector<double> dist(n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::nearest_centroid(x, c, std::span<const double>(norms), std::span(labels), std::span(dist));
    else
      kernels::serial::nearest_centroid(x, c, std::span<const double>(norms), std::span(labels), std::span(dist));
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 100 * 256));
}

}  // namespace

BENCHMARK(BM_affine_nt<false>)->Name("affine_nt/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_affine_nt<true>)->Name("affine_nt/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_tn<false>)->Name("gemm_tn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm_tn<true>)->Name("gemm_tn/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_nearest_centroid<false>)->Name("nearest_centroid/serial")->Arg(1000)->Arg(5000);
BENCHMARK(BM_nearest_centroid<true>)->Name("nearest_centroid/omp")->Arg(1000)->Arg(5000);

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("udft_threads", std::to_string(parallel::num_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
