#include <benchmark/benchmark.h>

#include "odmarl/analysis.hpp"
#include "odmarl/dataset.hpp"
#include "odmarl/empirical.hpp"
#include "odmarl/learner.hpp"

using namespace odmarl;

namespace {

struct DgFixture {
  EnvSpec env = discretized_dg(21, 5, 25);
  JointPolicy behavior = uniform_policy(env);
  std::vector<AgentDataset> datasets = collect(env, behavior, 1000, 1);
  EmpiricalModel model =
      rescale_rewards(build_model(datasets[0], env.n_states, 5), 1.0, 2.0);
  QTable q = QTable::constant(model, 20.0);
};

DgFixture& fixture() {
  static DgFixture f;
  return f;
}

}  // namespace

static void BM_CollectEpisodes(benchmark::State& state) {
  const EnvSpec env = discretized_dg(21, 5, 25);
  const JointPolicy behavior = uniform_policy(env);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collect(env, behavior, 100, seed++));
  }
  state.SetItemsProcessed(state.iterations() * 100 * 25);
}
BENCHMARK(BM_CollectEpisodes);

static void BM_BuildModel(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_model(f.datasets[0], f.env.n_states, 5));
  }
  state.SetItemsProcessed(state.iterations() * f.datasets[0].records.size());
}
BENCHMARK(BM_BuildModel);

static void BM_ModifiedTransitions(benchmark::State& state) {
  auto& f = fixture();
  TransformSpec spec;
  spec.mode = TransformMode::vd_tn;
  int s = 0;
  for (auto _ : state) {
    while (!f.model.visited(s % f.model.n_states, 0)) ++s;
    benchmark::DoNotOptimize(
        modified_transitions(f.model, f.q, s % f.model.n_states, 0, 0.95, spec));
    ++s;
  }
}
BENCHMARK(BM_ModifiedTransitions);

static void BM_ViSweep(benchmark::State& state) {
  auto& f = fixture();
  TransformSpec spec;
  spec.mode = static_cast<TransformMode>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(vi_sweep(f.model, f.q, 0.95, spec));
  }
}
BENCHMARK(BM_ViSweep)->Arg(0)->Arg(3);  // unmodified and combined

static void BM_TdSteps(benchmark::State& state) {
  auto& f = fixture();
  LearnConfig config;
  config.gamma = 0.95;
  config.lr = 0.01;
  config.steps = 10000;
  config.transform.mode = TransformMode::vd_tn;
  config.q_init = 20.0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(weighted_td_learning(f.datasets[0], f.model, config));
  }
  state.SetItemsProcessed(state.iterations() * config.steps);
}
BENCHMARK(BM_TdSteps);

BENCHMARK_MAIN();
