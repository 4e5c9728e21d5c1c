#pragma once

#include <fstream>
#include <iosfwd>

#include "dragonpit/env.hpp"

namespace dragonpit {

struct ReplayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kReplayVersion = 1;
inline constexpr const char* kReplaySuffix = ".replay.jsonl";

// Post-step unit snapshot. Enough to re-check a re-simulation bit for bit.
struct UnitSnap {
  int actor = 0;
  double x = 0, z = 0;
  double hp = 0, energy = 0;
  std::array<int, 3> skill_cd{0, 0, 0};
  int summoner_cd = 0;
  bool alive = true;

  friend bool operator==(const UnitSnap&, const UnitSnap&) = default;
};

UnitSnap snap_unit(const UnitState& u);

struct ReplayStep {
  int step_index = 0;  // index before the tick: first record is 0
  std::vector<int> actions;
  std::vector<DamageEvent> events;
  double reward = 0;
  long long step_damage = 0;
  std::vector<UnitSnap> heroes;
  UnitSnap dragon;

  friend bool operator==(const ReplayStep&, const ReplayStep&) = default;
};

struct ReplaySummary {
  int steps = 0;
  double total_reward = 0;
  long long total_damage = 0;
  std::vector<long long> per_agent_damage;
  bool dragon_dead = false;
  bool partial = false;  // footer missing or marked interrupted

  friend bool operator==(const ReplaySummary&, const ReplaySummary&) = default;
};

struct ReplayData {
  int version = kReplayVersion;
  int protocol_version = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  ScenarioConfig scenario;
  std::vector<ReplayStep> steps;
  ReplaySummary summary;
};

// Streams one episode to line-delimited JSON: header, one line per step,
// footer. Abandoning the writer without end() leaves a file that reads back
// flagged partial.
class ReplayWriter {
 public:
  ReplayWriter(const std::string& path, const ScenarioConfig& cfg,
               std::uint64_t seed);
  void add_step(const std::vector<int>& actions, const StepResult& result,
                const WorldState& world);
  void end(bool interrupted = false);
  const std::string& path() const { return path_; }
  const ReplaySummary& summary() const { return summary_; }

 private:
  std::string path_;
  std::ofstream out_;
  int n_agents_;
  ReplaySummary summary_;
  bool ended_ = false;
};

ReplayData read_replay(const std::string& path);
ReplayData parse_replay(std::istream& in);

// Re-runs the recorded actions through a fresh env and demands an exact
// state/event/reward match at every step. Throws ReplayError on drift.
void verify_replay(const ReplayData& replay);

// Per-agent contribution analysis of a finished replay.
struct AgentContribution {
  int agent = 0;
  long long damage = 0;
  double share = 0;          // of total hero damage
  int steps_alive = 0;
  int idle_steps = 0;        // alive, dealt nothing, made no approach
  double idle_fraction = 0;  // idle_steps / steps_alive
};

std::vector<AgentContribution> damage_breakdown(const ReplayData& replay);

}  // namespace dragonpit
