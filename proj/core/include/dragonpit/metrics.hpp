#pragma once

#include <string>
#include <vector>

#include "dragonpit/env.hpp"

namespace dragonpit {

// One finished episode as a metrics row.
struct EpisodeMetrics {
  int episode = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  long long total_damage = 0;
  double reward_sum = 0;
  bool dragon_dead = false;
  std::vector<long long> per_agent_damage;
  std::string replay_file;  // basename, empty when replays are off
};

inline constexpr int kRunCsvVersion = 1;

// Schema (version pinned by golden tests):
//   # dragonpit-run v1 mode=<m> policy=<p> episodes=<n> seed=<s>
//   episode,seed,steps,total_damage,reward_sum,dragon_dead,
//   damage_agent<0..n-1>,replay_file
void write_run_csv(const std::string& path, const std::string& mode_label,
                   const std::string& policy, std::uint64_t seed,
                   int n_agents, const std::vector<EpisodeMetrics>& rows);

struct BenchReport {
  std::string mode_label;
  long long episodes = 0;
  long long env_steps = 0;
  long long agent_steps = 0;
  double wall_seconds = 0;
  double episodes_per_sec = 0;
  double agent_steps_per_hour = 0;
};

inline constexpr int kBenchReportVersion = 1;

std::string format_bench_report(const BenchReport& report);

// Single-threaded random-policy timing loop. The bench command and the
// throughput check both run exactly this.
BenchReport run_bench(const ScenarioConfig& cfg, const std::string& mode_label,
                      long long episodes, std::uint64_t seed);

}  // namespace dragonpit
