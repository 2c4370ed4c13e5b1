#include <benchmark/benchmark.h>

#include "dsgp4kit/gradients.hpp"

using namespace dsgp4kit;

namespace {

ElementSet sentinel_elements() {
  return to_elements(parse_tle("1 40697U 15028A   22159.89292057  .00000111  00000-0  59112-4 0  9998",
                               "2 40697  98.5685 234.7917 0000491 348.2227 119.9277 14.31085333362518"));
}

// Jet cost grows with the number of seeded parameters.
void BM_Jacobian(benchmark::State& state) {
  const ElementSet e = sentinel_elements();
  const std::vector<Param> all = FreeParamSet::all().params();
  const FreeParamSet p(std::vector<Param>(all.begin(), all.begin() + state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(e, p, 1440.0));
}
BENCHMARK(BM_Jacobian)->DenseRange(1, 9, 2);

void BM_QuadFiniteDifference(benchmark::State& state) {
  const ElementSet e = sentinel_elements();
  const FreeParamSet p = FreeParamSet::all();
  const auto steps = default_fd_steps(p);
  for (auto _ : state) benchmark::DoNotOptimize(fd_jacobian(e, p, 1440.0, steps));
}
BENCHMARK(BM_QuadFiniteDifference)->Unit(benchmark::kMillisecond);

void BM_StmTle(benchmark::State& state) {
  const ElementSet e = sentinel_elements();
  for (auto _ : state) benchmark::DoNotOptimize(stm_tle(e, 1440.0));
}
BENCHMARK(BM_StmTle);

}  // namespace
