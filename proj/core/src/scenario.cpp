#include "dragonpit/scenario.hpp"

#include <set>

#include <nlohmann/json.hpp>

namespace dragonpit {

using nlohmann::json;

void validate_scenario(const ScenarioConfig& cfg) {
  const GameData& data = game_data();
  if (cfg.n_agents < 1 || cfg.n_agents > kSpawnPointCount) {
    throw ConfigError("n_agents outside 1..20");
  }
  if (static_cast<int>(cfg.heroes.size()) != cfg.n_agents) {
    throw ConfigError("hero list length must equal n_agents");
  }
  if (cfg.episode_limit < 1) throw ConfigError("episode_limit must be positive");
  if (cfg.dragon.max_hp <= 0) throw ConfigError("dragon max_hp must be positive");
  if (cfg.dragon_skill_prob < 0 || cfg.dragon_skill_prob > 1) {
    throw ConfigError("dragon_skill_prob outside [0, 1]");
  }
  std::set<int> points;
  for (const auto& h : cfg.heroes) {
    const HeroSpec& spec = data.hero(h.unit_id);
    if (h.level < 1 || h.level > 15) {
      throw ConfigError(spec.name + ": level outside 1..15");
    }
    for (int i = 0; i < 3; ++i) {
      int cap = static_cast<int>(spec.skills[i].levels.size());
      if (h.skill_levels[i] < 0 || h.skill_levels[i] > cap) {
        throw ConfigError(spec.name + ": skill " + std::to_string(i + 1) +
                          " level outside 0.." + std::to_string(cap));
      }
    }
    if (h.skill_levels[2] > 0 && h.level < 4) {
      throw ConfigError(spec.name + ": skill 3 requires hero level 4");
    }
    if (h.spawn_point < 1 || h.spawn_point > kSpawnPointCount) {
      throw ConfigError(spec.name + ": spawn_point outside 1..20");
    }
    if (!points.insert(h.spawn_point).second) {
      throw ConfigError("spawn points must be distinct");
    }
    const SummonerSkillSpec& summoner = data.summoner(spec.summoner_id);
    if (!summoner.effect) {
      throw ConfigError(summoner.name + ": summoner skill has no effect data");
    }
  }
}

ScenarioConfig load_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<int>() != 1) {
    throw ConfigError("scenario document version must be 1");
  }
  ScenarioConfig cfg;
  cfg.name = j.value("name", std::string("custom"));
  if (j.contains("mode_id")) {
    std::string m = j.at("mode_id").get<std::string>();
    if (m.size() != 1) throw ConfigError("mode_id must be a single letter");
    cfg.mode_id = m[0];
  }
  cfg.n_agents = j.at("n_agents").get<int>();
  cfg.episode_limit = j.value("episode_limit", 150);
  for (const auto& h : j.at("heroes")) {
    HeroSlot slot;
    slot.unit_id = h.at("unit_id").get<int>();
    slot.level = h.at("level").get<int>();
    const auto& sl = h.at("skill_levels");
    if (sl.size() != 3) throw ConfigError("skill_levels needs three entries");
    for (int i = 0; i < 3; ++i) slot.skill_levels[i] = sl.at(i).get<int>();
    slot.equipped = h.value("equipped", false);
    slot.spawn_point = h.at("spawn_point").get<int>();
    cfg.heroes.push_back(slot);
  }
  if (j.contains("dragon")) {
    const auto& d = j.at("dragon");
    cfg.dragon.max_hp = d.value("max_hp", 40000.0);
    cfg.dragon.stationary = d.value("stationary", false);
  }
  std::string sp = j.value("seed_policy", std::string("per_episode"));
  if (sp == "fixed") {
    cfg.seed_policy = SeedPolicy::fixed;
  } else if (sp == "per_episode") {
    cfg.seed_policy = SeedPolicy::per_episode;
  } else {
    throw ConfigError("seed_policy must be fixed or per_episode");
  }
  cfg.randomize_spawns = j.value("randomize_spawns", false);
  cfg.enable_energy_costs = j.value("enable_energy_costs", false);
  cfg.raw_observations = j.value("raw_observations", false);
  cfg.dragon_skill_prob = j.value("dragon_skill_prob", 0.3);
  validate_scenario(cfg);
  return cfg;
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json j;
  j["version"] = 1;
  j["name"] = cfg.name;
  if (cfg.mode_id) j["mode_id"] = std::string(1, *cfg.mode_id);
  j["n_agents"] = cfg.n_agents;
  j["episode_limit"] = cfg.episode_limit;
  json heroes = json::array();
  for (const auto& h : cfg.heroes) {
    json slot;
    slot["unit_id"] = h.unit_id;
    slot["level"] = h.level;
    slot["skill_levels"] = h.skill_levels;
    slot["equipped"] = h.equipped;
    slot["spawn_point"] = h.spawn_point;
    heroes.push_back(slot);
  }
  j["heroes"] = heroes;
  j["dragon"] = {{"max_hp", cfg.dragon.max_hp},
                 {"stationary", cfg.dragon.stationary}};
  j["seed_policy"] =
      cfg.seed_policy == SeedPolicy::fixed ? "fixed" : "per_episode";
  j["randomize_spawns"] = cfg.randomize_spawns;
  j["enable_energy_costs"] = cfg.enable_energy_costs;
  j["raw_observations"] = cfg.raw_observations;
  j["dragon_skill_prob"] = cfg.dragon_skill_prob;
  return j.dump();
}

ScenarioConfig builtin_mode(char mode) {
  struct ModeRow {
    int level;
    std::array<int, 3> skills;
    bool equipped;
    bool homo;
    double dragon_hp;
  };
  ModeRow row;
  switch (mode) {
    case 'A': row = {1, {0, 0, 0}, false, false, 40000}; break;
    case 'B': row = {4, {0, 0, 0}, false, false, 40000}; break;
    case 'C': row = {15, {0, 0, 0}, false, false, 40000}; break;
    case 'D': row = {15, {6, 6, 3}, false, false, 40000}; break;
    case 'E': row = {15, {6, 6, 3}, false, true, 40000}; break;
    case 'F': row = {4, {2, 1, 1}, false, false, 40000}; break;
    case 'G': row = {4, {2, 1, 1}, true, false, 500000}; break;
    default: throw ConfigError(std::string("unknown mode: ") + mode);
  }
  // The standard lineup, in slot order.
  static const int kBasicLineup[5] = {11301, 13301, 14101, 16701, 12801};
  static const int kHomoHero = 16701;

  ScenarioConfig cfg;
  cfg.name = std::string("mode_") + mode;
  cfg.mode_id = mode;
  cfg.n_agents = 5;
  cfg.episode_limit = 150;
  for (int i = 0; i < 5; ++i) {
    HeroSlot slot;
    slot.unit_id = row.homo ? kHomoHero : kBasicLineup[i];
    slot.level = row.level;
    slot.skill_levels = row.skills;
    slot.equipped = row.equipped;
    slot.spawn_point = i + 1;
    cfg.heroes.push_back(slot);
  }
  cfg.dragon.max_hp = row.dragon_hp;
  validate_scenario(cfg);
  return cfg;
}

std::vector<Vec2> spawn_positions(const ScenarioConfig& cfg, SeededRng& rng) {
  std::vector<int> points;
  if (cfg.randomize_spawns) {
    std::vector<int> all(kSpawnPointCount);
    for (int i = 0; i < kSpawnPointCount; ++i) all[i] = i + 1;
    rng.shuffle(all);
    points.assign(all.begin(), all.begin() + cfg.n_agents);
  } else {
    for (const auto& h : cfg.heroes) points.push_back(h.spawn_point);
  }
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (int p : points) out.push_back(spawn_point_coord(p));
  return out;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::string text = serialize_scenario(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash_hex(const ScenarioConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

}  // namespace dragonpit
