#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dragonpit/data.hpp"
#include "dragonpit/geometry.hpp"
#include "dragonpit/rng.hpp"

namespace dragonpit {

enum class SeedPolicy { fixed, per_episode };

struct HeroSlot {
  int unit_id = 0;
  int level = 1;
  std::array<int, 3> skill_levels{0, 0, 0};
  bool equipped = false;
  int spawn_point = 1;  // 1..20 on the spawn ring

  friend bool operator==(const HeroSlot&, const HeroSlot&) = default;
};

struct DragonSetup {
  double max_hp = 40000;
  bool stationary = false;

  friend bool operator==(const DragonSetup&, const DragonSetup&) = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::optional<char> mode_id;  // 'A'..'G' for bundled presets
  int n_agents = 5;
  int episode_limit = 150;
  std::vector<HeroSlot> heroes;
  DragonSetup dragon;
  SeedPolicy seed_policy = SeedPolicy::per_episode;
  bool randomize_spawns = false;
  bool enable_energy_costs = false;
  bool raw_observations = false;
  double dragon_skill_prob = 0.3;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Parse + validate a scenario document. Throws ConfigError naming the
// violated rule.
ScenarioConfig load_scenario(const std::string& json_text);

// Canonical JSON document for a config. load_scenario(serialize_scenario(c))
// round-trips to an equal config, and the text feeds the config hash.
std::string serialize_scenario(const ScenarioConfig& cfg);

// Structural validation shared by load_scenario and the bundled presets.
void validate_scenario(const ScenarioConfig& cfg);

// The seven bundled presets, 'A'..'G'.
ScenarioConfig builtin_mode(char mode);

// Hero spawn coordinates for an episode. Honors the configured ring anchors;
// with randomize_spawns, draws distinct anchors from the episode stream.
std::vector<Vec2> spawn_positions(const ScenarioConfig& cfg, SeededRng& rng);

// FNV-1a over the canonical scenario document; used in handshakes and
// replay headers.
std::uint64_t config_hash(const ScenarioConfig& cfg);
std::string config_hash_hex(const ScenarioConfig& cfg);

}  // namespace dragonpit
