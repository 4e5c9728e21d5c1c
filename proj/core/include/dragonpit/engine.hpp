#pragma once

#include <stdexcept>
#include <variant>

#include "dragonpit/scenario.hpp"
#include "dragonpit/world.hpp"

namespace dragonpit {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MoveDir {
  up, down, left, right, left_up, right_up, right_down, left_down
};

struct NoopCmd {};
struct MoveCmd { MoveDir dir; };
struct AttackCmd {};  // basic attack; the dragon is the only enemy
struct SkillCmd {
  int index = 0;              // 0..2
  double bearing_deg = 0;     // dir_skill aim
  int target_actor = kDragonActor;  // obj_skill aim
  Vec2 target_pos;            // pos_skill aim
};
struct SummonerCmd {};

using Command = std::variant<NoopCmd, MoveCmd, AttackCmd, SkillCmd, SummonerCmd>;

// A hero slot with its catalog rows resolved for the configured level and
// loadout. Cooldowns are already cooldown-reduction adjusted.
struct CompiledHero {
  const HeroSpec* spec = nullptr;
  HeroSlot slot;
  UnitStats stats;
  const SummonerSkillSpec* summoner = nullptr;
  std::array<SkillLevelEntry, 3> skill_rows{};  // valid where learned
  std::array<int, 3> skill_cooldowns{0, 0, 0};
};

struct CompiledScenario {
  ScenarioConfig config;
  std::vector<CompiledHero> heroes;
  const DragonSpec* dragon = nullptr;
  UnitStats dragon_stats;

  static CompiledScenario compile(const ScenarioConfig& cfg);
};

// Freshly spawned world: full hp/energy, cooldowns clear, dragon at the pit.
WorldState init_world(const CompiledScenario& sc, std::uint64_t seed);

// Fixed-offset eight-direction move, scaled by slows, clamped to the map.
Vec2 apply_move(Vec2 pos, MoveDir dir, double move_mult = 1.0);

struct DamageRoll {
  long long amount = 0;  // before target-hp clamping
  bool crit = false;
};

// def - pierce soaks damage through the standard 600-point curve.
double mitigation_factor(double defense, double pierce);

// Basic attack: physical, can crit. Consumes exactly one rng draw.
DamageRoll compute_basic_damage(const UnitStats& attacker,
                                const UnitStats& defender,
                                double damage_mult, SeededRng& rng);

// Skill hit: flat base plus an attack ratio, mitigated by the matching
// school. Skills never crit and draw no randomness.
DamageRoll compute_skill_damage(const UnitStats& attacker,
                                const UnitStats& defender, DamageSchool school,
                                double base, double ratio, double damage_mult);

struct DragonDecision {
  enum class Kind { noop, cast, attack, move } kind = Kind::noop;
  int skill_index = -1;
  int target_actor = kDragonActor;  // single-target cast / basic attack
  Vec2 move_delta;
};

// Scripted dragon brain. With probability skill_prob casts a random ready
// skill that has a reachable victim (uniform target for single-target
// casts); otherwise basic-attacks the nearest hero in range, else closes
// in on the nearest hero. Draws only from `rng`.
DragonDecision dragon_policy(const CompiledScenario& sc, const WorldState& w,
                             SeededRng& rng);

// Advance one tick. Phases: hero moves, hero attacks/casts in agent order
// against the pre-phase dragon snapshot, dragon action, cooldown/buff/regen
// bookkeeping, step counter. Returns every damage event of the tick.
std::vector<DamageEvent> resolve_step(const CompiledScenario& sc,
                                      WorldState& w,
                                      const std::vector<Command>& commands);

}  // namespace dragonpit
