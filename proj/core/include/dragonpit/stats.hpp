#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace dragonpit {

// Combat attribute block. Rate-like fields (crit, vamp, cooldown reduction)
// are in basis points: 10000 = 100%. hp/energy regen are points per step.
struct UnitStats {
  double max_hp = 0;
  double phys_attack = 0;
  double phys_defense = 0;
  double magic_attack = 0;
  double magic_defense = 0;
  double move_speed = 0;
  double attack_speed_bonus = 0;
  double max_energy = 0;
  double hp_regen = 0;
  double energy_regen = 0;
  double phys_pierce = 0;
  double magic_pierce = 0;
  double crit_rate = 0;
  double crit_effect = 0;
  double phys_vamp = 0;
  double magic_vamp = 0;
  double cooldown_reduction = 0;
  double attack_range = 0;

  friend bool operator==(const UnitStats&, const UnitStats&) = default;
};

inline constexpr int kStatCount = 18;

inline const std::array<std::string, kStatCount>& stat_names() {
  static const std::array<std::string, kStatCount> names = {
      "max_hp",        "phys_attack",  "phys_defense",  "magic_attack",
      "magic_defense", "move_speed",   "attack_speed_bonus", "max_energy",
      "hp_regen",      "energy_regen", "phys_pierce",   "magic_pierce",
      "crit_rate",     "crit_effect",  "phys_vamp",     "magic_vamp",
      "cooldown_reduction", "attack_range"};
  return names;
}

inline double& stat_ref(UnitStats& s, int i) {
  double* fields[kStatCount] = {
      &s.max_hp,        &s.phys_attack,  &s.phys_defense,  &s.magic_attack,
      &s.magic_defense, &s.move_speed,   &s.attack_speed_bonus, &s.max_energy,
      &s.hp_regen,      &s.energy_regen, &s.phys_pierce,   &s.magic_pierce,
      &s.crit_rate,     &s.crit_effect,  &s.phys_vamp,     &s.magic_vamp,
      &s.cooldown_reduction, &s.attack_range};
  return *fields[i];
}

inline double stat_get(const UnitStats& s, int i) {
  return stat_ref(const_cast<UnitStats&>(s), i);
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void validate_stats(const UnitStats& s, const std::string& who) {
  for (int i = 0; i < kStatCount; ++i) {
    if (stat_get(s, i) < 0) {
      throw ConfigError(who + ": negative " + stat_names()[i]);
    }
  }
  if (s.crit_rate > 10000) throw ConfigError(who + ": crit_rate above 10000");
  if (s.max_hp <= 0) throw ConfigError(who + ": max_hp must be positive");
}

}  // namespace dragonpit
