#include <map>

#include "dragonpit/policies.hpp"
#include "doctest.h"

using namespace dragonpit;

namespace {

std::array<int, kNumActions> moves_only() {
  std::array<int, kNumActions> m{};
  for (int a : {kActUp, kActDown, kActLeft, kActRight, kActLeftUp, kActRightUp,
                kActRightDown, kActLeftDown}) {
    m[a] = 1;
  }
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("policies");

TEST_CASE("in range, the scripted attacker prefers big skills over pokes") {
  std::vector<double> obs = {0, 0, 1, 0.01, 0, 1};
  auto mask = moves_only();
  mask[kActAttack] = 1;

  CHECK(rule_policy(obs, mask, 0.01) == kActAttack);

  mask[kActSummoner] = 1;
  CHECK(rule_policy(obs, mask, 0.01) == kActSummoner);

  mask[kActSkill1] = 1;
  CHECK(rule_policy(obs, mask, 0.01) == kActSkill1);

  mask[kActSkill2] = 1;
  CHECK(rule_policy(obs, mask, 0.01) == kActSkill2);

  mask[kActSkill3] = 1;
  CHECK(rule_policy(obs, mask, 0.01) == kActSkill3);
}

TEST_CASE("out of range, the scripted attacker closes both axis gaps") {
  auto mask = moves_only();
  double dz = 0.01;

  // Dragon up-right of the hero.
  CHECK(rule_policy({0, 0, 1, 0.5, 0.5, 1}, mask, dz) == kActRightUp);
  CHECK(rule_policy({0, 0, 1, -0.5, 0.5, 1}, mask, dz) == kActLeftUp);
  CHECK(rule_policy({0, 0, 1, 0.5, -0.5, 1}, mask, dz) == kActRightDown);
  CHECK(rule_policy({0, 0, 1, -0.5, -0.5, 1}, mask, dz) == kActLeftDown);

  // One axis already aligned within the deadzone: cardinal move.
  CHECK(rule_policy({0, 0, 1, 0.5, 0.005, 1}, mask, dz) == kActRight);
  CHECK(rule_policy({0, 0, 1, -0.5, 0.005, 1}, mask, dz) == kActLeft);
  CHECK(rule_policy({0, 0, 1, 0.005, 0.5, 1}, mask, dz) == kActUp);
  CHECK(rule_policy({0, 0, 1, 0.005, -0.5, 1}, mask, dz) == kActDown);
}

TEST_CASE("the deadzone matches the observation scale") {
  ScenarioConfig cfg = builtin_mode('A');
  CHECK(rule_axis_deadzone(cfg) ==
        doctest::Approx(kRuleAxisDeadzone / kMapHalfExtent));
  cfg.raw_observations = true;
  CHECK(rule_axis_deadzone(cfg) == kRuleAxisDeadzone);
}

TEST_CASE("the random policy only ever picks legal actions") {
  SeededRng rng(123);
  auto mask = moves_only();
  mask[kActAttack] = 1;
  std::map<int, int> counts;
  for (int i = 0; i < 2000; ++i) {
    int a = random_policy(mask, rng);
    CHECK(mask[a] == 1);
    ++counts[a];
  }
  // All nine legal actions show up; nothing is starved.
  CHECK(counts.size() == 9);
  for (const auto& [action, n] : counts) CHECK(n > 100);

  std::array<int, kNumActions> empty{};
  CHECK_THROWS_AS(random_policy(empty, rng), EnvError);
}

TEST_CASE("team helpers produce one legal action per agent") {
  Env env(builtin_mode('D'));
  env.reset(3);
  SeededRng rng(3);
  for (int step = 0; step < 30 && env.episode_active(); ++step) {
    auto masks = env.get_avail_actions();
    auto rule = rule_team_actions(env);
    auto random = random_team_actions(env, rng);
    REQUIRE(rule.size() == 5);
    REQUIRE(random.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(masks[i][rule[i]] == 1);
      CHECK(masks[i][random[i]] == 1);
    }
    env.step(rule);
  }
  // The scripted team reliably hurts the dragon.
  CHECK(env.world().cumulative_dragon_damage > 0);
}

TEST_CASE("scripted play beats random play on the same scenario") {
  auto mean_damage = [](bool scripted) {
    Env env(builtin_mode('D'));
    SeededRng rng(7);
    long long total = 0;
    for (int ep = 0; ep < 3; ++ep) {
      env.reset(500 + ep);
      while (env.episode_active()) {
        env.step(scripted ? rule_team_actions(env)
                          : random_team_actions(env, rng));
      }
      total += env.world().cumulative_dragon_damage;
    }
    return total;
  };
  CHECK(mean_damage(true) > 2 * mean_damage(false));
}

TEST_SUITE_END();
