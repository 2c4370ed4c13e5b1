#include <benchmark/benchmark.h>

#include "dsgp4kit/batch.hpp"

using namespace dsgp4kit;

namespace {

const TleRecord& sentinel() {
  static const TleRecord t = parse_tle("1 40697U 15028A   22159.89292057  .00000111  00000-0  59112-4 0  9998",
                                       "2 40697  98.5685 234.7917 0000491 348.2227 119.9277 14.31085333362518");
  return t;
}

void BM_Initialize(benchmark::State& state) {
  const ElementSet e = to_elements(sentinel());
  for (auto _ : state) benchmark::DoNotOptimize(initialize(e));
}
BENCHMARK(BM_Initialize);

void BM_Propagate(benchmark::State& state) {
  const Model m = initialize(to_elements(sentinel()));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(propagate(m, t));
    t = t < 4320.0 ? t + 1.0 : 0.0;
  }
}
BENCHMARK(BM_Propagate);

void BM_PropagateLongDouble(benchmark::State& state) {
  const ElementSet e = to_elements(sentinel());
  BasicElements<long double> el;
  el.epoch = e.epoch;
  el.no_kozai = e.no_kozai;
  el.ecco = e.ecco;
  el.inclo = e.inclo;
  el.nodeo = e.nodeo;
  el.argpo = e.argpo;
  el.mo = e.mo;
  el.bstar = e.bstar;
  const auto m = initialize(el);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(m, 1440.0));
}
BENCHMARK(BM_PropagateLongDouble);

// One batch of `range(0)` single-time items; items/s is the throughput.
void BM_Batch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  const Model m = initialize(to_elements(sentinel()));
  std::vector<Model> models(n, m);
  std::vector<std::vector<double>> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = {static_cast<double>(i % 4321)};
  const BatchJob job = BatchJob::per_model(std::move(models), std::move(times));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(job, workers));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Batch)->ArgsProduct({{10000, 100000}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_NaiveLoop(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Model m = initialize(to_elements(sentinel()));
  const std::vector<Model> models(n, m);
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) times[i] = static_cast<double>(i % 4321);
  std::vector<StateTeme> out;
  for (auto _ : state) {
    naive_loop(models, times, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_NaiveLoop)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
