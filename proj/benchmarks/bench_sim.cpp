#include <benchmark/benchmark.h>

#include "lorasim/sim.hpp"

using namespace lorasim::sim;

static void BM_BaselineScenario(benchmark::State& state) {
  Scenario s = make_canned("baseline");
  s.horizon_ms = static_cast<double>(state.range(0));
  std::int64_t events = 0;
  for (auto _ : state) {
    Simulation sim(s);
    events += sim.run().metrics.events;
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_BaselineScenario)->Arg(600000)->Arg(2400000)->Unit(benchmark::kMillisecond);

static void BM_JamImpersonation(benchmark::State& state) {
  Scenario s = make_canned("jam-impersonation");
  s.horizon_ms = static_cast<double>(state.range(0));
  std::int64_t events = 0;
  for (auto _ : state) {
    Simulation sim(s);
    events += sim.run().metrics.events;
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_JamImpersonation)->Arg(600000)->Arg(2200000)->Unit(benchmark::kMillisecond);

static void BM_SfSweep(benchmark::State& state) {
  Scenario s = make_canned("sf-sweep");
  std::int64_t events = 0;
  for (auto _ : state) {
    Simulation sim(s);
    events += sim.run().metrics.events;
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_SfSweep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
