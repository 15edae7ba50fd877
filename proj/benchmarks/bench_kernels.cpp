#include <benchmark/benchmark.h>

#include "nbrgds/distributions.hpp"
#include "nbrgds/inference.hpp"

using namespace nbrgds;

static void BM_Gamma(benchmark::State& state) {
  RngStream rng(1);
  const double shape = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_gamma(shape, 1.0, rng));
}
BENCHMARK(BM_Gamma)->Arg(1)->Arg(10)->Arg(100);

static void BM_Poisson(benchmark::State& state) {
  RngStream rng(2);
  const double mean = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_poisson(mean, rng));
}
BENCHMARK(BM_Poisson)->Arg(1)->Arg(30)->Arg(1000);

static void BM_Crt(benchmark::State& state) {
  RngStream rng(3);
  const Count customers = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_crt(customers, 0.5, rng));
}
BENCHMARK(BM_Crt)->Arg(10)->Arg(100)->Arg(1000);

static void BM_Bessel(benchmark::State& state) {
  RngStream rng(4);
  const double arg = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_bessel(0.5, arg, rng));
}
BENCHMARK(BM_Bessel)->Arg(1)->Arg(10)->Arg(100);

static void BM_ChainCount(benchmark::State& state) {
  RngStream rng(5);
  ChainCountTerms terms;
  terms.shape = 2.0;
  terms.evidence = state.range(0);
  terms.exposure = 1.5;
  for (auto _ : state) benchmark::DoNotOptimize(sample_chain_count(terms, rng));
}
BENCHMARK(BM_ChainCount)->Arg(0)->Arg(10)->Arg(200);

static void BM_MultinomialThinning(benchmark::State& state) {
  RngStream rng(6);
  const std::vector<double> weights(static_cast<std::size_t>(state.range(0)), 1.0);
  std::vector<Count> out(weights.size());
  for (auto _ : state) {
    sample_multinomial_thinning(50, weights, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_MultinomialThinning)->Arg(25)->Arg(100);
