#include <benchmark/benchmark.h>

#include "nbrgds/data_eval.hpp"
#include "nbrgds/inference.hpp"

using namespace nbrgds;

namespace {

void run_sweeps(benchmark::State& state, Variant variant, ChainFamily chain) {
  ZinbConfig z = zinb_preset(5);
  z.n_groups = 5;
  z.T = 100;
  const CountMatrix counts = generate_zinb(z, RngStream(7)).counts;
  ModelConfig config;
  config.V = counts.V();
  config.T = counts.T();
  config.K = static_cast<int>(state.range(0));
  config.C = config.K;
  config.variant = variant;
  config.chain = chain;
  const SweepContext ctx(counts, MaskSpec{}, config);
  LatentState s = initialize_state(ctx, RngStream(8));
  AuxiliaryCounts aux;
  const RngStream sweeps(9);
  std::uint64_t i = 0;
  for (auto _ : state) gibbs_sweep(ctx, s, aux, sweeps.split(++i));
}

}  // namespace

static void BM_SweepPlain(benchmark::State& state) {
  run_sweeps(state, Variant::Plain, ChainFamily::Nbrgmp);
}
BENCHMARK(BM_SweepPlain)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

static void BM_SweepPrgmc(benchmark::State& state) {
  run_sweeps(state, Variant::Plain, ChainFamily::Prgmc);
}
BENCHMARK(BM_SweepPrgmc)->Arg(25)->Unit(benchmark::kMillisecond);

static void BM_SweepFs(benchmark::State& state) {
  run_sweeps(state, Variant::FactorStructured, ChainFamily::Nbrgmp);
}
BENCHMARK(BM_SweepFs)->Arg(25)->Unit(benchmark::kMillisecond);

static void BM_SweepGs(benchmark::State& state) {
  run_sweeps(state, Variant::GraphStructured, ChainFamily::Nbrgmp);
}
BENCHMARK(BM_SweepGs)->Arg(25)->Unit(benchmark::kMillisecond);
