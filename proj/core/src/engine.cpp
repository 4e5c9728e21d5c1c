#include "dragonpit/engine.hpp"

#include <algorithm>
#include <cmath>

namespace dragonpit {

namespace {

double integralize(double v) { return static_cast<double>(std::llround(v)); }

int adjusted_cooldown(int table_cd, double cdr) {
  double scaled = table_cd * (1.0 - cdr / 10000.0);
  return std::max(1, static_cast<int>(std::llround(scaled)));
}

const UnitStats& hero_stats(const CompiledScenario& sc, int agent) {
  return sc.heroes[agent].stats;
}

// Clamp a roll against what the target has left; returns hp actually removed.
long long apply_damage(UnitState& target, long long amount) {
  long long applied = std::min<long long>(amount, static_cast<long long>(target.hp));
  target.hp -= static_cast<double>(applied);
  if (target.hp <= 0) {
    target.hp = 0;
    target.alive = false;
  }
  return applied;
}

void heal(UnitState& u, double max_hp, long long amount) {
  if (!u.alive || amount <= 0) return;
  u.hp = std::min(max_hp, u.hp + static_cast<double>(amount));
}

}  // namespace

CompiledScenario CompiledScenario::compile(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  const GameData& data = game_data();
  CompiledScenario sc;
  sc.config = cfg;
  for (const auto& slot : cfg.heroes) {
    CompiledHero ch;
    ch.spec = &data.hero(slot.unit_id);
    ch.slot = slot;
    ch.stats = stats_at_level(*ch.spec, slot.level, slot.equipped,
                              data.find_equipment(slot.unit_id));
    // Keep hp arithmetic on whole points so damage/heal events stay integral.
    ch.stats.max_hp = integralize(ch.stats.max_hp);
    ch.stats.hp_regen = integralize(ch.stats.hp_regen);
    ch.summoner = &data.summoner(ch.spec->summoner_id);
    for (int i = 0; i < 3; ++i) {
      int lvl = slot.skill_levels[i];
      if (lvl >= 1) {
        ch.skill_rows[i] = ch.spec->skills[i].levels[lvl - 1];
        ch.skill_cooldowns[i] = adjusted_cooldown(
            ch.skill_rows[i].cooldown_steps, ch.stats.cooldown_reduction);
      }
    }
    sc.heroes.push_back(ch);
  }
  sc.dragon = &data.dragon;
  sc.dragon_stats = data.dragon.stats;
  sc.dragon_stats.max_hp = integralize(cfg.dragon.max_hp);
  return sc;
}

WorldState init_world(const CompiledScenario& sc, std::uint64_t seed) {
  WorldState w;
  w.rng.seed(seed);
  std::vector<Vec2> spawns = spawn_positions(sc.config, w.rng);
  for (int i = 0; i < sc.config.n_agents; ++i) {
    UnitState u;
    u.actor = i;
    u.unit_id = sc.heroes[i].slot.unit_id;
    u.pos = spawns[i];
    u.hp = sc.heroes[i].stats.max_hp;
    u.energy = sc.heroes[i].stats.max_energy;
    w.heroes.push_back(u);
  }
  w.dragon.actor = kDragonActor;
  w.dragon.unit_id = sc.dragon->unit_id;
  w.dragon.pos = {0, 0};
  w.dragon.hp = sc.dragon_stats.max_hp;
  return w;
}

Vec2 apply_move(Vec2 pos, MoveDir dir, double move_mult) {
  double dx = 0, dz = 0;
  switch (dir) {
    case MoveDir::up: dz = 1; break;
    case MoveDir::down: dz = -1; break;
    case MoveDir::left: dx = -1; break;
    case MoveDir::right: dx = 1; break;
    case MoveDir::left_up: dx = -1; dz = 1; break;
    case MoveDir::right_up: dx = 1; dz = 1; break;
    case MoveDir::right_down: dx = 1; dz = -1; break;
    case MoveDir::left_down: dx = -1; dz = -1; break;
  }
  double step = kMoveOffset * move_mult;
  return clamp_to_map({pos.x + dx * step, pos.z + dz * step});
}

double mitigation_factor(double defense, double pierce) {
  double effective = std::max(0.0, defense - pierce);
  return 600.0 / (600.0 + effective);
}

DamageRoll compute_basic_damage(const UnitStats& attacker,
                                const UnitStats& defender,
                                double damage_mult, SeededRng& rng) {
  double mitigated = attacker.phys_attack *
                     mitigation_factor(defender.phys_defense, attacker.phys_pierce);
  long long base = std::max(1LL, std::llround(mitigated * damage_mult));
  DamageRoll roll;
  roll.crit = rng.chance(attacker.crit_rate / 10000.0);
  roll.amount = roll.crit
      ? std::max(1LL, std::llround(static_cast<double>(base) *
                                   (1.0 + attacker.crit_effect / 10000.0)))
      : base;
  return roll;
}

DamageRoll compute_skill_damage(const UnitStats& attacker,
                                const UnitStats& defender, DamageSchool school,
                                double base, double ratio, double damage_mult) {
  double raw, factor;
  if (school == DamageSchool::physical) {
    raw = base + ratio * attacker.phys_attack;
    factor = mitigation_factor(defender.phys_defense, attacker.phys_pierce);
  } else {
    raw = base + ratio * attacker.magic_attack;
    factor = mitigation_factor(defender.magic_defense, attacker.magic_pierce);
  }
  DamageRoll roll;
  roll.amount = std::max(1LL, std::llround(raw * factor * damage_mult));
  return roll;
}

DragonDecision dragon_policy(const CompiledScenario& sc, const WorldState& w,
                             SeededRng& rng) {
  DragonDecision d;
  if (!w.dragon.alive || sc.config.dragon.stationary) return d;

  std::vector<int> living;
  for (const auto& h : w.heroes) {
    if (h.alive) living.push_back(h.actor);
  }
  if (living.empty()) return d;

  // Ready skills that can actually reach somebody.
  std::vector<int> castable;
  for (int s = 0; s < static_cast<int>(sc.dragon->skills.size()); ++s) {
    if (w.dragon.skill_cd[s] != 0) continue;
    const DragonSkill& skill = sc.dragon->skills[s];
    bool reachable = false;
    for (int a : living) {
      if (distance(w.heroes[a].pos, w.dragon.pos) <= skill.range) {
        reachable = true;
        break;
      }
    }
    if (reachable) castable.push_back(s);
  }

  if (!castable.empty() && rng.chance(sc.config.dragon_skill_prob)) {
    int s = castable[rng.index(castable.size())];
    d.kind = DragonDecision::Kind::cast;
    d.skill_index = s;
    if (!sc.dragon->skills[s].area) {
      std::vector<int> in_range;
      for (int a : living) {
        if (distance(w.heroes[a].pos, w.dragon.pos) <= sc.dragon->skills[s].range) {
          in_range.push_back(a);
        }
      }
      d.target_actor = in_range[rng.index(in_range.size())];
    }
    return d;
  }

  // Basic attack the nearest hero in range; ties break toward the lowest
  // agent index.
  int nearest = -1;
  double best = 0;
  for (int a : living) {
    double dist = distance(w.heroes[a].pos, w.dragon.pos);
    if (nearest < 0 || dist < best) {
      nearest = a;
      best = dist;
    }
  }
  if (best <= sc.dragon_stats.attack_range) {
    d.kind = DragonDecision::Kind::attack;
    d.target_actor = nearest;
    return d;
  }

  // Close the gap, capped by move speed.
  Vec2 to = w.heroes[nearest].pos - w.dragon.pos;
  double dist = length(to);
  double step = std::min(sc.dragon_stats.move_speed, dist);
  d.kind = DragonDecision::Kind::move;
  d.move_delta = {to.x / dist * step, to.z / dist * step};
  return d;
}

std::vector<DamageEvent> resolve_step(const CompiledScenario& sc,
                                      WorldState& w,
                                      const std::vector<Command>& commands) {
  int n = sc.config.n_agents;
  if (static_cast<int>(commands.size()) != n) {
    throw EngineError("command list length must equal n_agents");
  }

  std::vector<DamageEvent> events;
  bool dragon_alive_pre = w.dragon.alive;

  // Phase 1: hero movement, simultaneous.
  for (int i = 0; i < n; ++i) {
    if (const MoveCmd* mv = std::get_if<MoveCmd>(&commands[i])) {
      if (!w.heroes[i].alive) throw EngineError("dead hero issued a command");
      w.heroes[i].pos = apply_move(w.heroes[i].pos, mv->dir,
                                   active_move_mult(w.heroes[i]));
    }
  }

  // Phase 2: hero attacks and casts, agent order, against the dragon as it
  // stood when the phase began. Rolls are hp-independent, so sequential
  // clamped application equals one summed application.
  for (int i = 0; i < n; ++i) {
    const Command& cmd = commands[i];
    if (std::holds_alternative<NoopCmd>(cmd) ||
        std::holds_alternative<MoveCmd>(cmd)) {
      continue;
    }
    UnitState& hero = w.heroes[i];
    if (!hero.alive) throw EngineError("dead hero issued a command");
    if (!dragon_alive_pre) throw EngineError("combat command after dragon death");
    const CompiledHero& ch = sc.heroes[i];

    if (std::holds_alternative<AttackCmd>(cmd)) {
      if (distance(hero.pos, w.dragon.pos) > ch.stats.attack_range) {
        throw EngineError(ch.spec->name + ": basic attack out of range");
      }
      DamageRoll roll = compute_basic_damage(ch.stats, sc.dragon_stats,
                                             active_damage_mult(hero), w.rng);
      long long applied = apply_damage(w.dragon, roll.amount);
      events.push_back({i, kDragonActor, applied, DamageKind::basic, roll.crit});
      double vamp = ch.stats.phys_vamp + active_vamp_add(hero, true);
      heal(hero, ch.stats.max_hp, std::llround(applied * vamp / 10000.0));
    } else if (const SkillCmd* sk = std::get_if<SkillCmd>(&cmd)) {
      int s = sk->index;
      if (s < 0 || s > 2) throw EngineError("skill index outside 0..2");
      if (ch.slot.skill_levels[s] < 1) throw EngineError("skill not learned");
      if (hero.skill_cd[s] != 0) throw EngineError("skill on cooldown");
      const SkillLevelEntry& row = ch.skill_rows[s];
      if (sc.config.enable_energy_costs) {
        if (hero.energy < row.energy_cost) throw EngineError("not enough energy");
        hero.energy -= row.energy_cost;
      }
      // Set to cd+1: the end-of-step decrement brings it to the table value.
      hero.skill_cd[s] = ch.skill_cooldowns[s] + 1;
      DamageRoll roll = compute_skill_damage(
          ch.stats, sc.dragon_stats, ch.spec->skills[s].school,
          row.damage_base, row.attack_ratio, active_damage_mult(hero));
      long long applied = apply_damage(w.dragon, roll.amount);
      DamageKind kind = s == 0   ? DamageKind::skill1
                        : s == 1 ? DamageKind::skill2
                                 : DamageKind::skill3;
      events.push_back({i, kDragonActor, applied, kind, false});
      bool physical = ch.spec->skills[s].school == DamageSchool::physical;
      double vamp = (physical ? ch.stats.phys_vamp : ch.stats.magic_vamp) +
                    active_vamp_add(hero, physical);
      heal(hero, ch.stats.max_hp, std::llround(applied * vamp / 10000.0));
    } else if (std::holds_alternative<SummonerCmd>(cmd)) {
      if (hero.summoner_cd != 0) throw EngineError("summoner skill on cooldown");
      const BuffEffect& eff = *ch.summoner->effect;
      hero.summoner_cd = ch.summoner->cooldown_steps + 1;
      hero.buffs.push_back({ch.summoner->id, eff.duration_steps + 1,
                            eff.damage_mult, eff.phys_vamp_add,
                            eff.magic_vamp_add, 1.0});
    }
  }

  // Phase 3: the dragon acts (skipped once slain this tick).
  if (w.dragon.alive) {
    DragonDecision d = dragon_policy(sc, w, w.rng);
    switch (d.kind) {
      case DragonDecision::Kind::noop:
        break;
      case DragonDecision::Kind::cast: {
        const DragonSkill& skill = sc.dragon->skills[d.skill_index];
        w.dragon.skill_cd[d.skill_index] = skill.cooldown_steps + 1;
        std::vector<int> victims;
        if (skill.area) {
          for (const auto& h : w.heroes) {
            if (h.alive && distance(h.pos, w.dragon.pos) <= skill.range) {
              victims.push_back(h.actor);
            }
          }
        } else {
          victims.push_back(d.target_actor);
        }
        for (int a : victims) {
          UnitState& hero = w.heroes[a];
          DamageRoll roll = compute_skill_damage(
              sc.dragon_stats, hero_stats(sc, a), skill.school,
              skill.damage_base, 0.0, active_damage_mult(w.dragon));
          long long applied = apply_damage(hero, roll.amount);
          events.push_back({kDragonActor, a, applied, DamageKind::dragon_skill,
                            false});
          if (skill.slow_steps > 0 && hero.alive) {
            hero.buffs.push_back({9000 + d.skill_index, skill.slow_steps + 1,
                                  1.0, 0, 0, skill.slow_mult});
          }
        }
        break;
      }
      case DragonDecision::Kind::attack: {
        UnitState& hero = w.heroes[d.target_actor];
        DamageRoll roll =
            compute_basic_damage(sc.dragon_stats, hero_stats(sc, d.target_actor),
                                 active_damage_mult(w.dragon), w.rng);
        long long applied = apply_damage(hero, roll.amount);
        events.push_back({kDragonActor, d.target_actor, applied,
                          DamageKind::basic, roll.crit});
        break;
      }
      case DragonDecision::Kind::move:
        w.dragon.pos = clamp_to_map(w.dragon.pos + d.move_delta);
        break;
    }
  }

  // Phase 4: cooldowns, buffs, regeneration.
  auto tick_unit = [](UnitState& u, const UnitStats& stats) {
    for (int& cd : u.skill_cd) {
      if (cd > 0) --cd;
    }
    if (u.summoner_cd > 0) --u.summoner_cd;
    for (auto& b : u.buffs) --b.remaining_steps;
    std::erase_if(u.buffs, [](const Buff& b) { return b.remaining_steps <= 0; });
    if (u.alive) {
      u.hp = std::min(stats.max_hp, u.hp + stats.hp_regen);
      u.energy = std::min(stats.max_energy, u.energy + stats.energy_regen);
    }
  };
  for (int i = 0; i < n; ++i) tick_unit(w.heroes[i], sc.heroes[i].stats);
  tick_unit(w.dragon, sc.dragon_stats);

  // Phase 5: advance the clock and the damage ledger.
  long long tick_damage = 0;
  for (const auto& ev : events) {
    if (ev.target == kDragonActor) tick_damage += ev.amount;
  }
  w.cumulative_dragon_damage += tick_damage;
  ++w.step_index;
  return events;
}

}  // namespace dragonpit
