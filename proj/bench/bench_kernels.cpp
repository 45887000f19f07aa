// Serial vs parallel sieve, FFT vs direct correlation.

#include <benchmark/benchmark.h>

#include "msl/correlations.hpp"
#include "msl/sieve.hpp"

using namespace msl;

namespace {

void BM_MobiusSieve(benchmark::State& state, Exec exec) {
  SieveConfig cfg;
  cfg.exec = exec;
  const auto X = static_cast<uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mertens(X, cfg));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * X));
}

void BM_Correlation(benchmark::State& state, CorrMethod method) {
  CorrelationOptions opts;
  opts.method = method;
  const auto X = static_cast<uint64_t>(state.range(0));
  const auto H = static_cast<uint64_t>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(shifted_correlation(FunctionId::mobius(), X, H, CorrelationBase::primes, opts).aggregate);
}

}  // namespace

BENCHMARK_CAPTURE(BM_MobiusSieve, serial, Exec::serial)->Arg(1 << 20)->Arg(1 << 24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MobiusSieve, parallel, Exec::parallel)->Arg(1 << 20)->Arg(1 << 24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Correlation, fft, CorrMethod::fft)
    ->Args({100000, 64})
    ->Args({100000, 1024})
    ->Args({1000000, 1024})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Correlation, direct, CorrMethod::direct)
    ->Args({100000, 64})
    ->Args({100000, 1024})
    ->Args({1000000, 1024})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
