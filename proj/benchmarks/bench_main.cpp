#include <benchmark/benchmark.h>

#include "agentic/agents.hpp"
#include "agentic/backends.hpp"
#include "agentic/metrics.hpp"
#include "agentic/orchestrator.hpp"
#include "agentic/plantio.hpp"
#include "agentic/runlog.hpp"
#include "agentic/twin.hpp"

using namespace agentic;

static void BM_TwinStep(benchmark::State& state) {
  const twin::TwinParams p;
  twin::TwinState s{30.0, 26.0, 0.0};
  const double dt = static_cast<double>(state.range(0));
  for (auto _ : state) {
    s = twin::step(p, s, 100.0, dt);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(dt / p.dt_internal));
}
BENCHMARK(BM_TwinStep)->Arg(1)->Arg(60);

static void BM_TwinRollout(benchmark::State& state) {
  const twin::TwinParams p;
  for (auto _ : state) benchmark::DoNotOptimize(twin::rollout(p, {43.0, 27.0, 0.0}, 0.0, 300.0));
}
BENCHMARK(BM_TwinRollout);

static void BM_ParseAction(benchmark::State& state) {
  const std::string reply =
      "The sensor reads 27.40°C which exceeds the upper limit of 27°C, so the heater must be switched off "
      "to let the unit cool back into the band.\nACTION: OFF";
  for (auto _ : state) benchmark::DoNotOptimize(agents::parse_action(reply));
}
BENCHMARK(BM_ParseAction);

static void BM_RenderPrompt(benchmark::State& state) {
  const auto agent = agents::default_operator_agent();
  const auto task = agents::default_operator_task();
  const plantio::PlantSample sample{12.0, 26.43, HeaterAction::On};
  for (auto _ : state) {
    benchmark::DoNotOptimize(agents::render_prompt(agent, task, sample, HeaterAction::On, {}, std::nullopt));
  }
}
BENCHMARK(BM_RenderPrompt);

// One 2400 s lockstep experiment with the oracle backend.
static void BM_OracleRun(benchmark::State& state) {
  for (auto _ : state) {
    plantio::SimulatedPlant plant({}, plantio::ClockMode::Lockstep);
    backends::ScriptedBackend backend(backends::ScriptedPolicy::oracle(), backends::LatencyModel::fixed(5.67));
    auto log = orch::ControlLoop({}, plant, backend, {}).run();
    benchmark::DoNotOptimize(log);
  }
}
BENCHMARK(BM_OracleRun)->Unit(benchmark::kMillisecond);

static void BM_EpisodeSerialization(benchmark::State& state) {
  plantio::SimulatedPlant plant({}, plantio::ClockMode::Lockstep);
  backends::ScriptedBackend backend(backends::ScriptedPolicy::flip(0.4, 0.63, 1), backends::LatencyModel::fixed(5.67));
  const auto log = orch::ControlLoop({}, plant, backend, {}).run();
  for (auto _ : state) {
    std::size_t bytes = 0;
    for (const auto& e : log) bytes += orch::episode_to_line(e).size();
    benchmark::DoNotOptimize(bytes);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(log.size()));
}
BENCHMARK(BM_EpisodeSerialization);
BENCHMARK_MAIN();
