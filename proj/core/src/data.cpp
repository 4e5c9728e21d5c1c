#include "dragonpit/data.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "dragonpit_builtin_data.hpp"

namespace dragonpit {

using nlohmann::json;

std::string to_string(SkillType t) {
  switch (t) {
    case SkillType::dir_skill: return "dir_skill";
    case SkillType::obj_skill: return "obj_skill";
    case SkillType::pos_skill: return "pos_skill";
    case SkillType::talent_skill: return "talent_skill";
  }
  return "dir_skill";
}

SkillType skill_type_from_string(const std::string& s) {
  if (s == "dir_skill") return SkillType::dir_skill;
  if (s == "obj_skill") return SkillType::obj_skill;
  if (s == "pos_skill") return SkillType::pos_skill;
  if (s == "talent_skill") return SkillType::talent_skill;
  throw ConfigError("unknown skill type: " + s);
}

std::string to_string(DamageSchool s) {
  return s == DamageSchool::physical ? "physical" : "magical";
}

DamageSchool school_from_string(const std::string& s) {
  if (s == "physical") return DamageSchool::physical;
  if (s == "magical") return DamageSchool::magical;
  throw ConfigError("unknown damage school: " + s);
}

namespace {

UnitStats parse_stats(const json& j, const std::string& who) {
  UnitStats s;
  for (int i = 0; i < kStatCount; ++i) {
    const auto& name = stat_names()[i];
    if (j.contains(name)) stat_ref(s, i) = j.at(name).get<double>();
  }
  validate_stats(s, who);
  return s;
}

SkillDef parse_skill(const json& j, SkillType type, const std::string& who) {
  SkillDef def;
  def.type = type;
  def.school = school_from_string(j.at("school").get<std::string>());
  for (const auto& row : j.at("levels")) {
    SkillLevelEntry e;
    e.damage_base = row.at("base").get<double>();
    e.attack_ratio = row.at("ratio").get<double>();
    e.cooldown_steps = row.at("cooldown").get<int>();
    e.energy_cost = row.at("energy").get<double>();
    if (e.damage_base < 0 || e.attack_ratio < 0 || e.cooldown_steps < 0 ||
        e.energy_cost < 0) {
      throw ConfigError(who + ": negative skill table entry");
    }
    def.levels.push_back(e);
  }
  if (def.levels.empty()) throw ConfigError(who + ": empty skill table");
  return def;
}

}  // namespace

namespace {

GameData parse_game_data_impl(const std::string& heroes_json,
                              const std::string& dragon_json,
                              const std::string& summoners_json,
                              const std::string& equipment_json) {
  GameData data;

  json jh = json::parse(heroes_json);
  for (const auto& h : jh.at("heroes")) {
    HeroSpec spec;
    spec.name = h.at("name").get<std::string>();
    spec.unit_id = h.at("unit_id").get<int>();
    spec.camp = h.at("camp").get<int>();
    spec.summoner_id = h.at("summoner_id").get<int>();
    spec.level3 = parse_stats(h.at("anchors").at("level3"), spec.name);
    spec.level15 = parse_stats(h.at("anchors").at("level15"), spec.name);
    const auto& types = h.at("skill_types");
    const auto& skills = h.at("skills");
    if (types.size() != 3 || skills.size() != 3) {
      throw ConfigError(spec.name + ": heroes carry exactly three skills");
    }
    for (int i = 0; i < 3; ++i) {
      spec.skill_types[i] =
          skill_type_from_string(types.at(i).get<std::string>());
      spec.skills[i] = parse_skill(skills.at(i), spec.skill_types[i],
                                   spec.name + " skill " + std::to_string(i + 1));
    }
    std::size_t want1 = 6, want3 = 3;
    if (spec.skills[0].levels.size() != want1 ||
        spec.skills[1].levels.size() != want1 ||
        spec.skills[2].levels.size() != want3) {
      throw ConfigError(spec.name + ": skill tables need 6/6/3 level rows");
    }
    for (const auto& other : data.heroes) {
      if (other.unit_id == spec.unit_id) {
        throw ConfigError("duplicate hero unit_id in catalog: " +
                          std::to_string(spec.unit_id));
      }
    }
    data.heroes.push_back(std::move(spec));
  }
  if (data.heroes.empty()) throw ConfigError("hero catalog is empty");

  json jd = json::parse(dragon_json);
  data.dragon.name = jd.at("name").get<std::string>();
  data.dragon.unit_id = jd.at("unit_id").get<int>();
  data.dragon.camp = jd.at("camp").get<int>();
  data.dragon.stats = parse_stats(jd.at("stats"), data.dragon.name);
  data.dragon.skill_prob = jd.at("skill_prob").get<double>();
  if (data.dragon.skill_prob < 0 || data.dragon.skill_prob > 1) {
    throw ConfigError("dragon skill_prob outside [0, 1]");
  }
  for (const auto& s : jd.at("skills")) {
    DragonSkill ds;
    ds.name = s.at("name").get<std::string>();
    ds.school = school_from_string(s.at("school").get<std::string>());
    ds.area = s.at("shape").get<std::string>() == "area";
    ds.damage_base = s.at("base").get<double>();
    ds.range = s.at("range").get<double>();
    ds.cooldown_steps = s.at("cooldown").get<int>();
    if (s.contains("slow_mult")) ds.slow_mult = s.at("slow_mult").get<double>();
    if (s.contains("slow_steps")) ds.slow_steps = s.at("slow_steps").get<int>();
    data.dragon.skills.push_back(ds);
  }
  if (data.dragon.skills.size() != 3) {
    throw ConfigError("dragon kit needs exactly three skills");
  }

  json js = json::parse(summoners_json);
  for (const auto& s : js.at("skills")) {
    SummonerSkillSpec spec;
    spec.name = s.at("name").get<std::string>();
    spec.id = s.at("id").get<int>();
    spec.cooldown_steps = s.at("cooldown").get<int>();
    if (s.contains("effect")) {
      const auto& e = s.at("effect");
      BuffEffect eff;
      eff.damage_mult = e.at("damage_mult").get<double>();
      eff.phys_vamp_add = e.at("phys_vamp_add").get<double>();
      eff.magic_vamp_add = e.at("magic_vamp_add").get<double>();
      eff.duration_steps = e.at("duration").get<int>();
      spec.effect = eff;
    }
    data.summoners.push_back(std::move(spec));
  }

  json je = json::parse(equipment_json);
  for (const auto& l : je.at("loadouts")) {
    EquipmentModifier mod;
    int unit_id = l.at("unit_id").get<int>();
    for (const auto& item : l.at("items")) {
      mod.items.push_back(item.get<std::string>());
    }
    for (int i = 0; i < kStatCount; ++i) stat_ref(mod.multipliers, i) = 1.0;
    if (l.contains("multipliers")) {
      for (auto it = l.at("multipliers").begin(); it != l.at("multipliers").end(); ++it) {
        bool known = false;
        for (int i = 0; i < kStatCount; ++i) {
          if (stat_names()[i] == it.key()) {
            stat_ref(mod.multipliers, i) = it.value().get<double>();
            known = true;
          }
        }
        if (!known) throw ConfigError("unknown equipment stat: " + it.key());
      }
    }
    if (l.contains("additions")) {
      for (auto it = l.at("additions").begin(); it != l.at("additions").end(); ++it) {
        bool known = false;
        for (int i = 0; i < kStatCount; ++i) {
          if (stat_names()[i] == it.key()) {
            stat_ref(mod.additions, i) = it.value().get<double>();
            known = true;
          }
        }
        if (!known) throw ConfigError("unknown equipment stat: " + it.key());
      }
    }
    data.equipment[unit_id] = std::move(mod);
  }

  return data;
}

}  // namespace

GameData parse_game_data(const std::string& heroes_json,
                         const std::string& dragon_json,
                         const std::string& summoners_json,
                         const std::string& equipment_json) {
  try {
    return parse_game_data_impl(heroes_json, dragon_json, summoners_json,
                                equipment_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("catalog document malformed: ") + e.what());
  }
}

const GameData& game_data() {
  static const GameData data = parse_game_data(
      detail::kHeroesJson, detail::kDragonJson, detail::kSummonersJson,
      detail::kEquipmentJson);
  return data;
}

const HeroSpec* GameData::find_hero(int unit_id) const {
  for (const auto& h : heroes) {
    if (h.unit_id == unit_id) return &h;
  }
  return nullptr;
}

const HeroSpec& GameData::hero(int unit_id) const {
  const HeroSpec* h = find_hero(unit_id);
  if (!h) throw ConfigError("unknown hero unit_id: " + std::to_string(unit_id));
  return *h;
}

const SummonerSkillSpec& GameData::summoner(int id) const {
  for (const auto& s : summoners) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown summoner skill id: " + std::to_string(id));
}

const EquipmentModifier* GameData::find_equipment(int unit_id) const {
  auto it = equipment.find(unit_id);
  return it == equipment.end() ? nullptr : &it->second;
}

UnitStats stats_at_level(const HeroSpec& hero, int level, bool equipped,
                         const EquipmentModifier* mod) {
  if (level < 1 || level > 15) {
    throw ConfigError(hero.name + ": level outside 1..15");
  }
  UnitStats out;
  double t = (level - 3) / 12.0;
  for (int i = 0; i < kStatCount; ++i) {
    double v3 = stat_get(hero.level3, i);
    double v15 = stat_get(hero.level15, i);
    double v = v3 + (v15 - v3) * t;
    if (equipped && mod) {
      v = v * stat_get(mod->multipliers, i) + stat_get(mod->additions, i);
    }
    stat_ref(out, i) = std::max(0.0, v);
  }
  return out;
}

UnitStats stats_at_level(const HeroSpec& hero, int level, bool equipped) {
  return stats_at_level(hero, level, equipped,
                        game_data().find_equipment(hero.unit_id));
}

}  // namespace dragonpit
