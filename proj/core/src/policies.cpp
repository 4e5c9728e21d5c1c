#include "dragonpit/policies.hpp"

namespace dragonpit {

int rule_policy(const std::vector<double>& obs,
                const std::array<int, kNumActions>& mask,
                double axis_deadzone) {
  if (mask[kActAttack]) {
    for (int a : {kActSkill3, kActSkill2, kActSkill1}) {
      if (mask[a]) return a;
    }
    if (mask[kActSummoner]) return kActSummoner;
    return kActAttack;
  }
  double dx = obs[3] - obs[0];
  double dz = obs[4] - obs[1];
  int sx = dx > axis_deadzone ? 1 : dx < -axis_deadzone ? -1 : 0;
  int sz = dz > axis_deadzone ? 1 : dz < -axis_deadzone ? -1 : 0;
  if (sx > 0 && sz > 0) return kActRightUp;
  if (sx > 0 && sz < 0) return kActRightDown;
  if (sx < 0 && sz > 0) return kActLeftUp;
  if (sx < 0 && sz < 0) return kActLeftDown;
  if (sx > 0) return kActRight;
  if (sx < 0) return kActLeft;
  if (sz > 0) return kActUp;
  return kActDown;
}

int random_policy(const std::array<int, kNumActions>& mask, SeededRng& rng) {
  std::array<int, kNumActions> legal{};
  int count = 0;
  for (int a = 0; a < kNumActions; ++a) {
    if (mask[a]) legal[count++] = a;
  }
  if (count == 0) throw EnvError("mask has no legal action");
  return legal[rng.index(count)];
}

double rule_axis_deadzone(const ScenarioConfig& cfg) {
  return cfg.raw_observations ? kRuleAxisDeadzone
                              : kRuleAxisDeadzone / kMapHalfExtent;
}

std::vector<int> rule_team_actions(const Env& env) {
  auto obs = env.get_obs();
  auto masks = env.get_avail_actions();
  double deadzone = rule_axis_deadzone(env.scenario().config);
  std::vector<int> actions(env.n_agents());
  for (int i = 0; i < env.n_agents(); ++i) {
    actions[i] = rule_policy(obs[i], masks[i], deadzone);
  }
  return actions;
}

std::vector<int> random_team_actions(const Env& env, SeededRng& rng) {
  auto masks = env.get_avail_actions();
  std::vector<int> actions(env.n_agents());
  for (int i = 0; i < env.n_agents(); ++i) {
    actions[i] = random_policy(masks[i], rng);
  }
  return actions;
}

}  // namespace dragonpit
