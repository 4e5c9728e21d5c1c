#include <benchmark/benchmark.h>

#include "dragonpit/engine.hpp"
#include "dragonpit/env.hpp"
#include "dragonpit/policies.hpp"
#include "dragonpit/rl/learner.hpp"
#include "dragonpit/rl/train.hpp"

namespace {

using namespace dragonpit;

void BM_ResolveStep(benchmark::State& state) {
  CompiledScenario sc = CompiledScenario::compile(builtin_mode('D'));
  WorldState w = init_world(sc, 42);
  std::vector<Command> cmds(sc.heroes.size());
  for (auto _ : state) {
    if (w.step_index >= sc.config.episode_limit || !w.dragon.alive)
      w = init_world(sc, 42);
    for (std::size_t i = 0; i < cmds.size(); ++i)
      cmds[i] = w.heroes[i].alive ? Command{MoveCmd{MoveDir::up}}
                                  : Command{NoopCmd{}};
    auto events = resolve_step(sc, w, cmds);
    benchmark::DoNotOptimize(events);
  }
}
BENCHMARK(BM_ResolveStep);

void BM_EnvStepRandom(benchmark::State& state) {
  Env env(builtin_mode('A'));
  SeededRng rng(7);
  std::uint64_t episode = 0;
  env.reset(episode);
  for (auto _ : state) {
    if (!env.episode_active()) env.reset(++episode);
    StepResult r = env.step(random_team_actions(env, rng));
    benchmark::DoNotOptimize(r.step_damage);
  }
}
BENCHMARK(BM_EnvStepRandom);

void BM_FullEpisodeRule(benchmark::State& state) {
  Env env(builtin_mode('D'));
  std::uint64_t episode = 0;
  for (auto _ : state) {
    env.reset(++episode);
    long long damage = 0;
    while (env.episode_active()) damage += env.step(rule_team_actions(env)).step_damage;
    benchmark::DoNotOptimize(damage);
  }
}
BENCHMARK(BM_FullEpisodeRule);

void BM_QLearnerAct(benchmark::State& state) {
  Env env(builtin_mode('A'));
  rl::QLearnerConfig qc;
  qc.mixer = "vdn";
  qc.n_agents = env.n_agents();
  qc.obs_dim = env.obs_dim();
  qc.state_dim = env.state_dim();
  qc.n_actions = env.n_actions();
  qc.rnn_hidden = 64;
  rl::QLearner learner(qc);
  SeededRng rng(7);
  env.reset(1);
  rl::ActState st = learner.init_act_state();
  rl::Matrix obs = rl::env_obs_matrix(env);
  rl::Matrix avail = rl::env_avail_matrix(env);
  for (auto _ : state) {
    auto actions = learner.act(obs, avail, st, 0.05, rng);
    benchmark::DoNotOptimize(actions);
  }
}
BENCHMARK(BM_QLearnerAct);

}  // namespace

BENCHMARK_MAIN();
