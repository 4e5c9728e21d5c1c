#include "dragonpit/env.hpp"

namespace dragonpit {

Env::Env(const ScenarioConfig& cfg) : sc_(CompiledScenario::compile(cfg)) {}

void Env::reset(std::uint64_t seed) {
  seed_ = seed;
  world_ = init_world(sc_, seed);
  active_ = true;
}

std::vector<std::vector<double>> Env::get_obs() const {
  bool raw = sc_.config.raw_observations;
  double dragon_max = sc_.dragon_stats.max_hp;
  std::vector<std::vector<double>> obs;
  obs.reserve(n_agents());
  for (int i = 0; i < n_agents(); ++i) {
    const UnitState& h = world_.heroes[i];
    double own_max = sc_.heroes[i].stats.max_hp;
    if (raw) {
      obs.push_back({h.pos.x, h.pos.z, h.hp, world_.dragon.pos.x,
                     world_.dragon.pos.z, world_.dragon.hp});
    } else {
      obs.push_back({h.pos.x / kMapHalfExtent, h.pos.z / kMapHalfExtent,
                     h.hp / own_max, world_.dragon.pos.x / kMapHalfExtent,
                     world_.dragon.pos.z / kMapHalfExtent,
                     world_.dragon.hp / dragon_max});
    }
  }
  return obs;
}

std::vector<double> Env::get_state() const {
  std::vector<double> state;
  state.reserve(state_dim());
  for (const auto& row : get_obs()) {
    state.insert(state.end(), row.begin(), row.end());
  }
  return state;
}

std::vector<std::array<int, kNumActions>> Env::get_avail_actions() const {
  std::vector<std::array<int, kNumActions>> masks(n_agents());
  bool dragon_alive = world_.dragon.alive;
  for (int i = 0; i < n_agents(); ++i) {
    auto& m = masks[i];
    m.fill(0);
    // Movement is always legal; for dead heroes it degenerates to a no-op.
    for (int a : {kActUp, kActDown, kActLeft, kActRight, kActLeftUp,
                  kActRightUp, kActRightDown, kActLeftDown}) {
      m[a] = 1;
    }
    const UnitState& h = world_.heroes[i];
    if (!h.alive || !dragon_alive) continue;
    const CompiledHero& ch = sc_.heroes[i];
    if (distance(h.pos, world_.dragon.pos) <= ch.stats.attack_range) {
      m[kActAttack] = 1;
    }
    for (int s = 0; s < 3; ++s) {
      if (ch.slot.skill_levels[s] >= 1 && h.skill_cd[s] == 0 &&
          (!sc_.config.enable_energy_costs ||
           h.energy >= ch.skill_rows[s].energy_cost)) {
        m[kActSkill1 + s] = 1;
      }
    }
    if (h.summoner_cd == 0) m[kActSummoner] = 1;
  }
  return masks;
}

void Env::set_world(WorldState w) {
  if (static_cast<int>(w.heroes.size()) != n_agents()) {
    throw EnvError("world hero count must equal n_agents");
  }
  world_ = std::move(w);
  active_ = true;
}

Command Env::action_to_command(int agent, int action) const {
  if (agent < 0 || agent >= n_agents()) throw EnvError("agent index out of range");
  if (action < 0 || action >= kNumActions) throw EnvError("action id out of range");
  const UnitState& h = world_.heroes[agent];
  if (!h.alive) return NoopCmd{};
  switch (action) {
    case kActUp: return MoveCmd{MoveDir::up};
    case kActDown: return MoveCmd{MoveDir::down};
    case kActLeft: return MoveCmd{MoveDir::left};
    case kActRight: return MoveCmd{MoveDir::right};
    case kActLeftUp: return MoveCmd{MoveDir::left_up};
    case kActRightUp: return MoveCmd{MoveDir::right_up};
    case kActRightDown: return MoveCmd{MoveDir::right_down};
    case kActLeftDown: return MoveCmd{MoveDir::left_down};
    case kActAttack: return AttackCmd{};
    case kActSummoner: return SummonerCmd{};
    default: break;
  }
  SkillCmd sk;
  sk.index = action - kActSkill1;
  switch (sc_.heroes[agent].spec->skill_types[sk.index]) {
    case SkillType::dir_skill:
      sk.bearing_deg = bearing_deg(h.pos, world_.dragon.pos);
      break;
    case SkillType::obj_skill:
      sk.target_actor = kDragonActor;
      break;
    case SkillType::pos_skill:
    case SkillType::talent_skill:
      sk.target_pos = world_.dragon.pos;
      break;
  }
  return sk;
}

StepResult Env::step(const std::vector<int>& actions) {
  if (!active_) throw EnvError("step on an inactive episode; call reset first");
  if (static_cast<int>(actions.size()) != n_agents()) {
    throw EnvError("action list length must equal n_agents");
  }
  auto masks = get_avail_actions();
  std::vector<Command> commands;
  commands.reserve(n_agents());
  for (int i = 0; i < n_agents(); ++i) {
    int a = actions[i];
    if (a < 0 || a >= kNumActions) throw EnvError("action id out of range");
    if (!masks[i][a]) {
      throw EnvError("unavailable action " + std::to_string(a) + " for agent " +
                     std::to_string(i));
    }
    commands.push_back(action_to_command(i, a));
  }

  double dragon_before = world_.dragon.hp;
  StepResult res;
  res.events = resolve_step(sc_, world_, commands);
  double damage = dragon_before - world_.dragon.hp;
  res.step_damage = static_cast<long long>(damage);
  res.reward = damage * 0.01;
  res.dragon_hp = world_.dragon.hp;
  res.per_agent_damage.assign(n_agents(), 0);
  for (const auto& ev : res.events) {
    if (ev.target == kDragonActor && ev.source >= 0) {
      res.per_agent_damage[ev.source] += ev.amount;
    }
  }
  res.terminated = !world_.dragon.alive;
  res.truncated = !res.terminated && world_.step_index >= sc_.config.episode_limit;
  if (res.terminated || res.truncated) active_ = false;
  return res;
}

}  // namespace dragonpit
