#include <benchmark/benchmark.h>

#include <random>

#include "tbm/algorithms.hpp"
#include "tbm/linalg.hpp"
#include "tbm/model.hpp"

namespace {

tbm::DenseTensor sparseSample(std::size_t n, double rho) {
  const auto spec = tbm::symmetricSpec(rho, tbm::cores::uninformative(), n, tbm::NoiseFamily::Bernoulli);
  return tbm::sample(spec, 1);
}

void BM_Sample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto spec = tbm::symmetricSpec(0.01, tbm::cores::uninformative(), n, tbm::NoiseFamily::Bernoulli);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tbm::sample(spec, seed++));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}
BENCHMARK(BM_Sample)->Arg(60)->Arg(120)->Arg(180)->Unit(benchmark::kMillisecond);

void BM_SparseGram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = tbm::matricize(sparseSample(n, 0.01), 0);
  for (auto _ : state) benchmark::DoNotOptimize(tbm::gram(m));
}
BENCHMARK(BM_SparseGram)->Arg(60)->Arg(120)->Arg(180)->Unit(benchmark::kMillisecond);

void BM_SymEigen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  tbm::DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(gen);
  for (auto _ : state) benchmark::DoNotOptimize(tbm::symEigen(a));
}
BENCHMARK(BM_SymEigen)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const auto pipeline = static_cast<tbm::Pipeline>(state.range(0));
  const auto y = sparseSample(120, 0.01);
  tbm::PipelineParams params;
  params.trim.rho = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(tbm::runPipeline(pipeline, y, params));
  state.SetLabel(std::string(tbm::pipelineName(pipeline)));
}
BENCHMARK(BM_Pipeline)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
