#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dragonpit/geometry.hpp"
#include "dragonpit/rng.hpp"

namespace dragonpit {

// Actor ids: heroes use their agent index (0-based); the dragon is -1.
inline constexpr int kDragonActor = -1;

enum class DamageKind { basic, skill1, skill2, skill3, dragon_skill };

// One resolved hit. `amount` is the hp actually removed (overkill is
// clamped away), so per-target sums reconcile exactly with hp deltas.
struct DamageEvent {
  int source = 0;
  int target = 0;
  long long amount = 0;
  DamageKind kind = DamageKind::basic;
  bool crit = false;

  friend bool operator==(const DamageEvent&, const DamageEvent&) = default;
};

// Timed status effect. `remaining_steps` ticks down in the end-of-step
// phase; the effect is live while it stays positive.
struct Buff {
  int id = 0;
  int remaining_steps = 0;
  double damage_mult = 1.0;
  double phys_vamp_add = 0;
  double magic_vamp_add = 0;
  double move_mult = 1.0;

  friend bool operator==(const Buff&, const Buff&) = default;
};

struct UnitState {
  int actor = 0;
  int unit_id = 0;
  Vec2 pos;
  double hp = 0;
  double energy = 0;
  std::array<int, 3> skill_cd{0, 0, 0};
  int summoner_cd = 0;
  bool alive = true;
  std::vector<Buff> buffs;

  friend bool operator==(const UnitState&, const UnitState&) = default;
};

// Single source of simulation truth for one episode.
struct WorldState {
  int step_index = 0;
  std::vector<UnitState> heroes;
  UnitState dragon;
  SeededRng rng;
  long long cumulative_dragon_damage = 0;
};

inline double active_damage_mult(const UnitState& u) {
  double m = 1.0;
  for (const auto& b : u.buffs) {
    if (b.remaining_steps > 0) m *= b.damage_mult;
  }
  return m;
}

inline double active_move_mult(const UnitState& u) {
  double m = 1.0;
  for (const auto& b : u.buffs) {
    if (b.remaining_steps > 0) m *= b.move_mult;
  }
  return m;
}

inline double active_vamp_add(const UnitState& u, bool physical) {
  double v = 0.0;
  for (const auto& b : u.buffs) {
    if (b.remaining_steps > 0) {
      v += physical ? b.phys_vamp_add : b.magic_vamp_add;
    }
  }
  return v;
}

}  // namespace dragonpit
