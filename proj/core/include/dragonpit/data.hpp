#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dragonpit/stats.hpp"

namespace dragonpit {

// How a skill is aimed on the wire / in commands. Damage resolution is the
// same for all three; talent_skill is accepted in data but no bundled hero
// uses it.
enum class SkillType { dir_skill, obj_skill, pos_skill, talent_skill };

enum class DamageSchool { physical, magical };

std::string to_string(SkillType t);
SkillType skill_type_from_string(const std::string& s);
std::string to_string(DamageSchool s);
DamageSchool school_from_string(const std::string& s);

// Per-level row of a hero skill table.
struct SkillLevelEntry {
  double damage_base = 0;
  double attack_ratio = 0;   // multiplies phys or magic attack by school
  int cooldown_steps = 0;
  double energy_cost = 0;
};

struct SkillDef {
  SkillType type = SkillType::dir_skill;
  DamageSchool school = DamageSchool::physical;
  std::vector<SkillLevelEntry> levels;  // skills 1/2 have 6 rows, skill 3 has 3
};

// Timed self-buff granted by a summoner skill cast.
struct BuffEffect {
  double damage_mult = 1.0;      // multiplies outgoing damage
  double phys_vamp_add = 0;      // basis points
  double magic_vamp_add = 0;     // basis points
  int duration_steps = 0;
};

struct SummonerSkillSpec {
  std::string name;
  int id = 0;
  int cooldown_steps = 0;
  std::optional<BuffEffect> effect;  // only skills with an effect are playable
};

// Aggregate stat changes of a hero's full six-item loadout.
// Multipliers apply before additions.
struct EquipmentModifier {
  std::vector<std::string> items;
  UnitStats multipliers;  // per-stat factor, 1.0 = unchanged
  UnitStats additions;    // per-stat flat bonus
};

struct HeroSpec {
  std::string name;
  int unit_id = 0;
  int camp = 1;
  UnitStats level3;
  UnitStats level15;
  std::array<SkillType, 3> skill_types{};
  std::array<SkillDef, 3> skills{};
  int summoner_id = 0;
};

// One entry of the dragon's scripted kit.
struct DragonSkill {
  std::string name;
  DamageSchool school = DamageSchool::physical;
  bool area = false;        // area: hits every living hero in range
  double damage_base = 0;
  double range = 0;
  int cooldown_steps = 0;
  double slow_mult = 1.0;   // movement multiplier applied to victims
  int slow_steps = 0;
};

struct DragonSpec {
  std::string name;
  int unit_id = 0;
  int camp = 2;
  UnitStats stats;
  double skill_prob = 0.3;
  std::vector<DragonSkill> skills;
};

struct GameData {
  std::vector<HeroSpec> heroes;
  DragonSpec dragon;
  std::vector<SummonerSkillSpec> summoners;
  std::map<int, EquipmentModifier> equipment;  // keyed by hero unit_id

  const HeroSpec& hero(int unit_id) const;
  const HeroSpec* find_hero(int unit_id) const;
  const SummonerSkillSpec& summoner(int id) const;
  const EquipmentModifier* find_equipment(int unit_id) const;
};

// Parsed bundled catalog. Built once, then shared.
const GameData& game_data();

// Parse a catalog from JSON text (exposed for tests and custom data).
GameData parse_game_data(const std::string& heroes_json,
                         const std::string& dragon_json,
                         const std::string& summoners_json,
                         const std::string& equipment_json);

// Linear interpolation between the level-3 and level-15 anchor rows,
// extrapolated below level 3 and clamped at zero. Attributes whose anchors
// agree stay constant. With `equipped`, loadout multipliers are applied
// first, then flat additions.
UnitStats stats_at_level(const HeroSpec& hero, int level, bool equipped,
                         const EquipmentModifier* mod);

// Convenience overload using the bundled catalog's loadout for the hero.
UnitStats stats_at_level(const HeroSpec& hero, int level, bool equipped);

}  // namespace dragonpit
