#pragma once

#include "dragonpit/env.hpp"

namespace dragonpit {

// Half a move offset: the approach rule ignores axis gaps smaller than this
// to avoid orbiting the target.
inline constexpr double kRuleAxisDeadzone = kMoveOffset / 2.0;

// Scripted attacker for one agent, computed from its own frame only.
// In attack range: highest ready skill, then summoner, then basic attack.
// Out of range: the eight-direction move that closes both axis gaps.
// `axis_deadzone` must be in the same units as the observation coordinates.
int rule_policy(const std::vector<double>& obs,
                const std::array<int, kNumActions>& mask,
                double axis_deadzone);

// Uniform draw over the legal actions.
int random_policy(const std::array<int, kNumActions>& mask, SeededRng& rng);

// Deadzone matching the env's observation scale.
double rule_axis_deadzone(const ScenarioConfig& cfg);

// Whole-team conveniences.
std::vector<int> rule_team_actions(const Env& env);
std::vector<int> random_team_actions(const Env& env, SeededRng& rng);

}  // namespace dragonpit
