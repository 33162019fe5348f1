#include <benchmark/benchmark.h>

#include "smm/smm.h"

namespace smm {
namespace {

Gridworld Cross(int arm) {
  return BuildCrossGridworld(CrossSpec(arm, 0.1, 0.5, 30));
}

RewardTable NoiseReward(std::size_t n) {
  Rng rng(1);
  std::vector<double> r(n);
  for (double& x : r) x = rng.Normal();
  return RewardTable::FromStates(std::move(r));
}

void BM_ValueIteration(benchmark::State& state) {
  const Gridworld w = Cross(static_cast<int>(state.range(0)));
  const RewardTable r = NoiseReward(w.mdp.num_states());
  for (auto _ : state) {
    benchmark::DoNotOptimize(FiniteHorizonValueIteration(w.mdp, r));
  }
  state.counters["states"] = static_cast<double>(w.mdp.num_states());
}
BENCHMARK(BM_ValueIteration)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_SoftValueIteration(benchmark::State& state) {
  const Gridworld w = Cross(static_cast<int>(state.range(0)));
  const RewardTable r = NoiseReward(w.mdp.num_states());
  for (auto _ : state) {
    benchmark::DoNotOptimize(SoftValueIteration(w.mdp, r, 1.0));
  }
}
BENCHMARK(BM_SoftValueIteration)->Arg(5)->Arg(20);

void BM_FiniteHorizonMarginal(benchmark::State& state) {
  const Gridworld w = Cross(static_cast<int>(state.range(0)));
  const Policy pi = RandomPolicy(w.mdp.num_states(), 4, 30, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FiniteHorizonMarginal(w.mdp, pi));
  }
}
BENCHMARK(BM_FiniteHorizonMarginal)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_StationaryDistribution(benchmark::State& state) {
  const Gridworld w = Cross(static_cast<int>(state.range(0)));
  const Policy pi = RandomPolicy(w.mdp.num_states(), 4, 1, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(StationaryDistribution(w.mdp, pi));
  }
}
BENCHMARK(BM_StationaryDistribution)->Arg(2)->Arg(5)->Arg(10);

// Whole fictitious-play runs; per-iteration cost is time / range(1).
void BM_FictitiousPlay(benchmark::State& state) {
  const Gridworld w = Cross(static_cast<int>(state.range(0)));
  PlayConfig c;
  c.iterations = static_cast<std::size_t>(state.range(1));
  const StateMarginal target = StateMarginal::Uniform(w.mdp.num_states());
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunFictitiousPlay(w.mdp, target, c));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_FictitiousPlay)->Args({5, 1})->Args({5, 50})->Args({20, 50});

void BM_Sm4Iteration(benchmark::State& state) {
  const Gridworld w = Cross(5);
  Sm4Config c;
  c.num_skills = static_cast<std::size_t>(state.range(0));
  c.play.iterations = 10;
  c.play.init = InitPolicy::kRandom;
  const StateMarginal target = StateMarginal::Uniform(w.mdp.num_states());
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunSm4(w.mdp, target, c));
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_Sm4Iteration)->Arg(1)->Arg(4);

}  // namespace
}  // namespace smm

BENCHMARK_MAIN();
