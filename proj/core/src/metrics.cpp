#include "dragonpit/metrics.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dragonpit/policies.hpp"

namespace dragonpit {

void write_run_csv(const std::string& path, const std::string& mode_label,
                   const std::string& policy, std::uint64_t seed,
                   int n_agents, const std::vector<EpisodeMetrics>& rows) {
  std::ofstream out(path);
  if (!out) throw EnvError("cannot write " + path);
  out << "# dragonpit-run v" << kRunCsvVersion << " mode=" << mode_label
      << " policy=" << policy << " episodes=" << rows.size()
      << " seed=" << seed << "\n";
  out << "episode,seed,steps,total_damage,reward_sum,dragon_dead";
  for (int a = 0; a < n_agents; ++a) out << ",damage_agent" << a;
  out << ",replay_file\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.episode << ',' << r.seed << ',' << r.steps << ','
        << r.total_damage << ',' << r.reward_sum << ','
        << (r.dragon_dead ? 1 : 0);
    for (int a = 0; a < n_agents; ++a) {
      long long d = a < static_cast<int>(r.per_agent_damage.size())
                        ? r.per_agent_damage[static_cast<std::size_t>(a)]
                        : 0;
      out << ',' << d;
    }
    out << ',' << r.replay_file << "\n";
  }
}

std::string format_bench_report(const BenchReport& report) {
  std::ostringstream out;
  out << "# dragonpit-bench v" << kBenchReportVersion << "\n";
  out << "mode=" << report.mode_label << "\n";
  out << "episodes=" << report.episodes << "\n";
  out << "env_steps=" << report.env_steps << "\n";
  out << "agent_steps=" << report.agent_steps << "\n";
  out << std::setprecision(6) << std::fixed;
  out << "wall_seconds=" << report.wall_seconds << "\n";
  out << std::setprecision(2);
  out << "episodes_per_sec=" << report.episodes_per_sec << "\n";
  out << "agent_steps_per_hour=" << report.agent_steps_per_hour << "\n";
  return out.str();
}

BenchReport run_bench(const ScenarioConfig& cfg, const std::string& mode_label,
                      long long episodes, std::uint64_t seed) {
  Env env(cfg);
  BenchReport report;
  report.mode_label = mode_label;
  report.episodes = episodes;

  SeededRng rng(mix_seed(seed, 0xbe9c4));
  auto t0 = std::chrono::steady_clock::now();
  for (long long e = 0; e < episodes; ++e) {
    env.reset(mix_seed(seed, static_cast<std::uint64_t>(e)));
    while (env.episode_active()) {
      env.step(random_team_actions(env, rng));
      ++report.env_steps;
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  report.agent_steps = report.env_steps * env.n_agents();
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (report.wall_seconds > 0 && episodes > 0) {
    report.episodes_per_sec =
        static_cast<double>(report.episodes) / report.wall_seconds;
    report.agent_steps_per_hour =
        static_cast<double>(report.agent_steps) / report.wall_seconds * 3600.0;
  }
  return report;
}

}  // namespace dragonpit
