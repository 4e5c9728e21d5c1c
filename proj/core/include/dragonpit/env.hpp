#pragma once

#include "dragonpit/engine.hpp"

namespace dragonpit {

struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Discrete per-agent actions.
enum Action : int {
  kActUp = 0,
  kActDown = 1,
  kActLeft = 2,
  kActRight = 3,
  kActAttack = 4,
  kActSkill1 = 5,
  kActSkill2 = 6,
  kActSkill3 = 7,
  kActSummoner = 8,
  kActLeftUp = 9,
  kActRightUp = 10,
  kActRightDown = 11,
  kActLeftDown = 12,
};

inline constexpr int kNumActions = 13;
inline constexpr int kObsDim = 6;

struct StepResult {
  double reward = 0;
  bool terminated = false;  // dragon slain
  bool truncated = false;   // step limit reached
  long long step_damage = 0;
  double dragon_hp = 0;
  std::vector<long long> per_agent_damage;
  std::vector<DamageEvent> events;
};

// Cooperative episode interface. Observations are
// [own x, own z, own hp, dragon x, dragon z, dragon hp]; the global state is
// their concatenation. Coordinates and hp are normalized by default
// (map half-extent / max hp); raw_observations in the scenario switches to
// engine units.
class Env {
 public:
  explicit Env(const ScenarioConfig& cfg);

  void reset(std::uint64_t seed);

  int n_agents() const { return sc_.config.n_agents; }
  int n_actions() const { return kNumActions; }
  int obs_dim() const { return kObsDim; }
  int state_dim() const { return kObsDim * n_agents(); }

  std::vector<std::vector<double>> get_obs() const;
  std::vector<double> get_state() const;
  std::vector<std::array<int, kNumActions>> get_avail_actions() const;

  // Validates every action against the availability mask (hard error on
  // violation), translates, resolves one tick.
  StepResult step(const std::vector<int>& actions);

  // Mask-independent translation of one agent action into an engine command.
  // Dead heroes yield Noop: their queued actions are dropped.
  Command action_to_command(int agent, int action) const;

  // Replaces the live world wholesale and marks the episode active. State
  // injection for mask probes and replay tooling; the world must match the
  // compiled scenario's agent count.
  void set_world(WorldState w);

  bool episode_active() const { return active_; }
  int step_index() const { return world_.step_index; }
  std::uint64_t episode_seed() const { return seed_; }
  const WorldState& world() const { return world_; }
  const CompiledScenario& scenario() const { return sc_; }

 private:
  CompiledScenario sc_;
  WorldState world_;
  std::uint64_t seed_ = 0;
  bool active_ = false;
};

}  // namespace dragonpit
