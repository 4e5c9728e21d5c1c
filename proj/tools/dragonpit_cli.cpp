// Command-line front door: baseline rollouts, training, throughput
// benchmarks, replay inspection, and the JSON-lines game server.
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "dragonpit/metrics.hpp"
#include "dragonpit/net.hpp"
#include "dragonpit/replay.hpp"
#include "dragonpit/rl/train.hpp"

namespace {

using namespace dragonpit;

std::string default_out_dir() {
  const char* env = std::getenv("DRAGONPIT_OUT_DIR");
  return env && *env ? env : "dragonpit_out";
}

// Scenario selection shared by most subcommands.
struct ScenarioArgs {
  std::string mode = "A";
  std::string scenario_file;
  bool stationary_dragon = false;
  bool randomize_spawns = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "Builtin mode letter")
        ->check(CLI::IsMember({"A", "B", "C", "D", "E", "F", "G"}));
    cmd->add_option("--scenario", scenario_file,
                    "Scenario JSON file (overrides --mode)")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--stationary-dragon", stationary_dragon,
                  "Pin the dragon in place (navigation drills)");
    cmd->add_flag("--randomize-spawns", randomize_spawns,
                  "Shuffle hero spawn points every reset");
  }

  ScenarioConfig build() const {
    ScenarioConfig cfg = scenario_file.empty() ? builtin_mode(mode[0])
                                               : load_scenario(scenario_file);
    if (stationary_dragon) cfg.dragon.stationary = true;
    if (randomize_spawns) cfg.randomize_spawns = true;
    return cfg;
  }

  std::string label() const {
    if (!scenario_file.empty())
      return std::filesystem::path(scenario_file).stem().string();
    return mode;
  }
};

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& ep) {
  auto colon = ep.rfind(':');
  if (colon == std::string::npos || colon + 1 >= ep.size())
    throw CLI::ValidationError("--endpoint", "expected host:port");
  int port = std::stoi(ep.substr(colon + 1));
  if (port <= 0 || port > 65535)
    throw CLI::ValidationError("--endpoint", "port out of range");
  return {ep.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int cmd_run(const ScenarioArgs& sargs, const std::string& policy,
            const std::string& checkpoint_file, int episodes,
            std::uint64_t seed, const std::string& out_dir, bool replays) {
  ScenarioConfig cfg = sargs.build();
  Env env(cfg);
  std::filesystem::create_directories(out_dir);

  std::unique_ptr<rl::CheckpointPolicy> ckpt;
  if (policy == "checkpoint") {
    if (checkpoint_file.empty())
      throw CLI::ValidationError("--checkpoint",
                                 "required with --policy checkpoint");
    ckpt = std::make_unique<rl::CheckpointPolicy>(checkpoint_file);
  }

  std::vector<EpisodeMetrics> rows;
  rows.reserve(static_cast<std::size_t>(episodes));
  const std::string label = sargs.label();
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t ep_seed = mix_seed(seed, static_cast<std::uint64_t>(e));
    env.reset(ep_seed);
    SeededRng rng(mix_seed(ep_seed, 0x9a11));
    if (ckpt) ckpt->begin_episode();

    std::unique_ptr<ReplayWriter> writer;
    if (replays) {
      std::string name = "run_" + label + "_" + policy + "_ep" +
                         std::to_string(e) + kReplaySuffix;
      writer = std::make_unique<ReplayWriter>(out_dir + "/" + name, cfg, ep_seed);
    }

    EpisodeMetrics m;
    m.episode = e;
    m.seed = ep_seed;
    m.per_agent_damage.assign(static_cast<std::size_t>(env.n_agents()), 0);
    while (env.episode_active()) {
      std::vector<int> actions;
      if (ckpt) actions = ckpt->act(env);
      else if (policy == "rule") actions = rule_team_actions(env);
      else actions = random_team_actions(env, rng);
      StepResult r = env.step(actions);
      if (writer) writer->add_step(actions, r, env.world());
      m.reward_sum += r.reward;
      m.total_damage += r.step_damage;
      m.dragon_dead = m.dragon_dead || r.terminated;
      for (std::size_t a = 0; a < m.per_agent_damage.size(); ++a)
        m.per_agent_damage[a] += r.per_agent_damage[a];
      ++m.steps;
    }
    if (writer) {
      writer->end();
      m.replay_file = std::filesystem::path(writer->path()).filename().string();
    }
    rows.push_back(std::move(m));
  }

  const std::string csv = out_dir + "/run_" + label + "_" + policy + ".csv";
  write_run_csv(csv, label, policy, seed, env.n_agents(), rows);

  long long total = 0;
  int kills = 0;
  for (const auto& r : rows) {
    total += r.total_damage;
    kills += r.dragon_dead ? 1 : 0;
  }
  std::cout << "ran " << episodes << " episode(s), mode " << label
            << ", policy " << policy << "\n";
  if (episodes > 0)
    std::cout << "mean damage " << static_cast<double>(total) / episodes
              << ", dragon killed in " << kills << "/" << episodes << "\n";
  std::cout << "metrics: " << csv << "\n";
  return 0;
}

int cmd_train(const ScenarioArgs& sargs, const std::string& method_str,
              long long episodes, std::vector<std::uint64_t> seeds,
              const std::string& out_dir, long long env_steps,
              const rl::TrainConfig& base, bool verbose) {
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
  rl::Method method = rl::method_from_string(method_str);

  std::vector<std::vector<rl::CurvePoint>> curves;
  for (std::uint64_t seed : seeds) {
    rl::TrainConfig cfg = base;
    cfg.method = method;
    if (sargs.scenario_file.empty()) {
      cfg.mode = sargs.mode[0];
    } else {
      cfg.scenario = sargs.build();
    }
    if (sargs.stationary_dragon || sargs.randomize_spawns)
      cfg.scenario = sargs.build();
    cfg.seed = seed;
    cfg.max_episodes = episodes;
    cfg.total_env_steps =
        episodes > 0 ? std::numeric_limits<long long>::max() / 2 : env_steps;
    cfg.out_dir = out_dir;
    cfg.verbose = verbose;
    rl::TrainResult res = rl::train_method(cfg);
    curves.push_back(res.curve);
    std::cout << "trained " << method_str << " mode " << sargs.label()
              << " seed " << seed << ": episodes=" << res.episodes
              << " env_steps=" << res.env_steps
              << " final_eval_damage=" << res.final_eval_damage
              << (res.diverged ? " DIVERGED" : "") << "\n";
    std::cout << "curve: " << res.curve_path << "\n";
  }

  if (seeds.size() > 1) {
    const char mode = sargs.scenario_file.empty() ? sargs.mode[0] : 'X';
    std::string agg = out_dir + "/aggregate_" + method_str + "_" +
                      std::string(1, mode) + ".csv";
    rl::write_aggregate_csv(agg, method, mode, seeds, curves);
    std::cout << "aggregate: " << agg << "\n";
  }
  return 0;
}

int cmd_bench(const ScenarioArgs& sargs, long long episodes,
              std::uint64_t seed) {
  BenchReport report = run_bench(sargs.build(), sargs.label(), episodes, seed);
  std::cout << format_bench_report(report);
  return 0;
}

int cmd_replay(const std::string& path, bool summary, bool per_agent,
               bool lazy) {
  ReplayData replay = read_replay(path);
  const bool timeline = !summary && !per_agent && !lazy;

  if (timeline) {
    for (const auto& s : replay.steps) {
      std::cout << "step " << s.step_index << " actions=[";
      for (std::size_t a = 0; a < s.actions.size(); ++a)
        std::cout << (a ? "," : "") << s.actions[a];
      std::cout << "] damage=" << s.step_damage << " reward=" << s.reward
                << " dragon_hp=" << s.dragon.hp << "\n";
    }
  }
  if (summary || timeline) {
    const auto& sm = replay.summary;
    std::cout << "episode summary: steps=" << sm.steps
              << " total_damage=" << sm.total_damage
              << " total_reward=" << sm.total_reward
              << " dragon_dead=" << (sm.dragon_dead ? "yes" : "no")
              << (sm.partial ? " (partial)" : "") << "\n";
    std::cout << "per-agent damage:";
    for (std::size_t a = 0; a < sm.per_agent_damage.size(); ++a)
      std::cout << " agent" << a << "=" << sm.per_agent_damage[a];
    std::cout << "\n";
  }
  if (per_agent || lazy) {
    auto contributions = damage_breakdown(replay);
    if (per_agent) {
      std::cout << "agent,damage,share,steps_alive,idle_steps,idle_fraction\n";
      for (const auto& c : contributions) {
        std::cout << c.agent << ',' << c.damage << ',' << c.share << ','
                  << c.steps_alive << ',' << c.idle_steps << ','
                  << c.idle_fraction << "\n";
      }
    }
    if (lazy) {
      int flagged = 0;
      for (const auto& c : contributions) {
        if (c.damage > 0) continue;
        ++flagged;
        std::cout << "agent " << c.agent
                  << ": LAZY (no damage dealt; idle_fraction="
                  << c.idle_fraction << ")\n";
      }
      if (flagged == 0) std::cout << "no lazy agents detected\n";
    }
  }
  return 0;
}

std::atomic<Server*> g_server{nullptr};

void handle_sigint(int) {
  if (Server* s = g_server.load()) s->stop();
}

int cmd_serve(const ScenarioArgs& sargs, const std::string& endpoint,
              const std::string& out_dir, int max_sessions) {
  auto [host, port] = split_endpoint(endpoint);
  ScenarioConfig cfg = sargs.build();
  std::filesystem::create_directories(out_dir);
  ServerOptions opts;
  opts.host = host;
  opts.port = port;
  opts.replay_dir = out_dir;
  opts.max_sessions = max_sessions;
  Server server(std::move(cfg), std::move(opts));
  server.start();
  g_server.store(&server);
  std::signal(SIGINT, handle_sigint);
  std::signal(SIGTERM, handle_sigint);
  std::cout << "serving mode " << sargs.label() << " on " << host << ":"
            << server.port() << " (replays in " << out_dir << ")\n"
            << std::flush;
  server.run();
  g_server.store(nullptr);
  std::cout << "server stopped\n";
  return 0;
}

int cmd_client(const ScenarioArgs& sargs, const std::string& endpoint,
               int episodes, std::uint64_t seed, const std::string& policy) {
  auto [host, port] = split_endpoint(endpoint);
  ScenarioConfig cfg = sargs.build();
  auto channel = SocketChannel::connect(host, port);
  ClientOptions opts;
  opts.hero_ids = scenario_hero_ids(cfg);
  opts.episodes = episodes;
  opts.seed = seed;
  opts.policy = policy == "random" ? ClientPolicy::random : ClientPolicy::rule;
  ClientRunSummary sum = run_client(*channel, opts);
  std::cout << "client finished: episodes=" << sum.episodes
            << " steps=" << sum.steps << " total_damage=" << sum.total_damage
            << " total_reward=" << sum.total_reward
            << " dragon_dead_any=" << (sum.dragon_dead_any ? "yes" : "no")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dragonpit: heroes-vs-dragon co-op benchmark harness"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();

  // ---- run ----
  auto* run = app.add_subcommand("run", "Roll out a policy, write metrics CSV + replays");
  ScenarioArgs run_sc;
  run_sc.attach(run);
  std::string run_policy = "rule";
  std::string run_ckpt;
  int run_episodes = 10;
  std::uint64_t run_seed = 1;
  bool run_replays = true;
  run->add_option("--policy", run_policy, "rule|random|checkpoint")
      ->check(CLI::IsMember({"rule", "random", "checkpoint"}));
  run->add_option("--checkpoint", run_ckpt, "Checkpoint file for --policy checkpoint");
  run->add_option("--episodes", run_episodes, "Episode count")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", run_seed, "Base seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("!--no-replays", run_replays, "Skip replay files");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Train a method, write curves + checkpoints");
  ScenarioArgs train_sc;
  train_sc.attach(train);
  std::string train_method;
  long long train_episodes = 0;
  long long train_env_steps = 100000;
  std::vector<std::uint64_t> train_seeds;
  bool train_verbose = false;
  rl::TrainConfig base;
  train->add_option("--method", train_method, "vdn|qmix|qplex|qatten|mappo|happo")
      ->required()
      ->check(CLI::IsMember({"vdn", "qmix", "qplex", "qatten", "mappo", "happo"}));
  train->add_option("--episodes", train_episodes,
                    "Episode budget per seed (0: use --env-steps)");
  train->add_option("--env-steps", train_env_steps, "Env-step budget per seed");
  train->add_option("--seeds", train_seeds, "Seeds (default 1..5)")->delimiter(',');
  train->add_option("--out", out_dir, "Output directory");
  train->add_flag("--verbose", train_verbose, "Per-report progress lines");
  train->add_option("--batch-size", base.batch_size, "Replay batch (value methods)");
  train->add_option("--train-interval", base.train_interval_episodes,
                    "Episodes between gradient updates (value methods)");
  train->add_option("--target-update", base.target_update_interval,
                    "Updates between target syncs");
  train->add_option("--rnn-hidden", base.rnn_hidden, "Recurrent width (value methods)");
  train->add_option("--mlp-hidden", base.mlp_hidden, "Actor/critic widths (pg methods)")
      ->delimiter(',');
  train->add_option("--rollout-episodes", base.rollout_episodes,
                    "Episodes per update (pg methods)");
  train->add_option("--lr", base.lr, "Value-method learning rate");
  train->add_option("--actor-lr", base.actor_lr, "Actor learning rate");
  train->add_option("--critic-lr", base.critic_lr, "Critic learning rate");
  train->add_option("--eps-anneal", base.eps_anneal, "Exploration anneal steps");
  train->add_option("--eval-episodes", base.eval_episodes, "Greedy eval episodes per report");
  train->add_option("--report-interval", base.report_interval_episodes,
                    "Episodes between curve points");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "Single-thread throughput benchmark");
  ScenarioArgs bench_sc;
  bench_sc.attach(bench);
  long long bench_episodes = 64;
  std::uint64_t bench_seed = 1;
  bench->add_option("--episodes", bench_episodes, "Episode count")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--seed", bench_seed, "Base seed");

  // ---- replay ----
  auto* replay = app.add_subcommand("replay", "Inspect a replay file");
  std::string replay_path;
  bool rp_summary = false, rp_per_agent = false, rp_lazy = false;
  replay->add_option("path", replay_path, "Replay file")->required();
  replay->add_flag("--summary", rp_summary, "Episode totals only");
  replay->add_flag("--per-agent", rp_per_agent, "Per-agent damage breakdown");
  replay->add_flag("--lazy", rp_lazy, "Flag agents that dealt no damage");

  // ---- serve ----
  auto* serve = app.add_subcommand("serve", "Run the JSON-lines game server");
  ScenarioArgs serve_sc;
  serve_sc.attach(serve);
  std::string serve_endpoint = "127.0.0.1:7777";
  int serve_max_sessions = 0;
  serve->add_option("--endpoint", serve_endpoint, "host:port");
  serve->add_option("--out", out_dir, "Replay directory");
  serve->add_option("--max-sessions", serve_max_sessions,
                    "Stop after N sessions (0: run until interrupted)");

  // ---- client ----
  auto* client = app.add_subcommand("client", "Example client for a running server");
  ScenarioArgs client_sc;
  client_sc.attach(client);
  std::string client_endpoint = "127.0.0.1:7777";
  int client_episodes = 1;
  std::uint64_t client_seed = 1;
  std::string client_policy = "rule";
  client->add_option("--endpoint", client_endpoint, "host:port");
  client->add_option("--episodes", client_episodes, "Episode count");
  client->add_option("--seed", client_seed, "Base seed");
  client->add_option("--policy", client_policy, "rule|random")
      ->check(CLI::IsMember({"rule", "random"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return cmd_run(run_sc, run_policy, run_ckpt, run_episodes, run_seed,
                     out_dir, run_replays);
    if (train->parsed())
      return cmd_train(train_sc, train_method, train_episodes, train_seeds,
                       out_dir, train_env_steps, base, train_verbose);
    if (bench->parsed()) return cmd_bench(bench_sc, bench_episodes, bench_seed);
    if (replay->parsed())
      return cmd_replay(replay_path, rp_summary, rp_per_agent, rp_lazy);
    if (serve->parsed())
      return cmd_serve(serve_sc, serve_endpoint, out_dir, serve_max_sessions);
    if (client->parsed())
      return cmd_client(client_sc, client_endpoint, client_episodes,
                        client_seed, client_policy);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
