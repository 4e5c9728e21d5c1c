#pragma once

#include <optional>

#include "dragonpit/env.hpp"
#include "dragonpit/rl/checkpoint.hpp"
#include "dragonpit/rl/learner.hpp"
#include "dragonpit/rl/policy_learner.hpp"

namespace dragonpit::rl {

enum class Method { vdn, qmix, qplex, qatten, mappo, happo };

Method method_from_string(const std::string& name);
std::string method_name(Method m);
bool is_value_method(Method m);
std::vector<Method> all_methods();

struct TrainConfig {
  Method method = Method::vdn;
  char mode = 'A';
  std::optional<ScenarioConfig> scenario;  // overrides mode when set

  long long total_env_steps = 100000;
  long long max_episodes = 0;  // 0: no episode cap
  std::uint64_t seed = 1;

  // Value-decomposition settings.
  int buffer_capacity = 5000;
  int batch_size = 64;
  int train_interval_episodes = 1;
  int rnn_hidden = 64;
  double td_lambda = 0.6;
  double eps_start = 1.0;
  double eps_finish = 0.05;
  long long eps_anneal = 100000;
  int target_update_interval = 200;

  // Policy-gradient settings.
  int rollout_episodes = 10;
  std::vector<int> mlp_hidden = {128, 128};
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int ppo_epochs = 5;
  double entropy_coef = 0.01;
  double huber_delta = 10.0;
  bool value_norm = true;

  // Shared. lr drives the value-method optimizer; the policy methods use
  // separate actor/critic rates.
  double lr = 1e-3;
  double actor_lr = 5e-4;
  double critic_lr = 5e-4;
  double gamma = 0.99;
  double grad_norm_clip = 10.0;

  int eval_episodes = 8;
  int report_interval_episodes = 20;
  std::string out_dir;  // empty: no curve/checkpoint files
  bool verbose = false;
};

struct CurvePoint {
  long long env_steps = 0;
  int episodes = 0;
  double train_return = 0;   // mean over the last report window
  double eval_return = 0;    // greedy
  double eval_damage = 0;
  double eval_kill_rate = 0;
  double loss = 0;
  double explore = 0;        // epsilon (value) or policy entropy (pg)
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  std::vector<double> episode_damage;  // per training episode, in order
  double final_eval_return = 0;
  double final_eval_damage = 0;
  double final_eval_kill_rate = 0;
  double best_eval_return = 0;
  long long env_steps = 0;
  int episodes = 0;
  int updates = 0;
  bool diverged = false;
  std::string curve_path;
  std::string checkpoint_path;
};

inline constexpr int kCurveCsvVersion = 1;
inline constexpr int kAggregateCsvVersion = 1;

void write_curve_csv(const std::string& path, Method method, char mode,
                     std::uint64_t seed, const std::vector<CurvePoint>& curve);

// Mean and standard error across seeds, row-aligned over the shortest curve.
void write_aggregate_csv(const std::string& path, Method method, char mode,
                         const std::vector<std::uint64_t>& seeds,
                         const std::vector<std::vector<CurvePoint>>& curves);

struct EvalResult {
  double mean_return = 0;
  double mean_damage = 0;
  double kill_rate = 0;
  double mean_steps = 0;
};

// Row-per-agent views of the current env step.
Matrix env_obs_matrix(const Env& env);
Matrix env_avail_matrix(const Env& env);

// Greedy rollouts with a trained value learner / policy learner.
EvalResult evaluate_q(Env& env, const QLearner& learner, int episodes,
                      std::uint64_t seed_base);
EvalResult evaluate_pg(Env& env, PgLearner& learner, int episodes,
                       std::uint64_t seed_base);

// Full training loop for any method; writes curve + checkpoint into
// cfg.out_dir when set.
TrainResult train_method(const TrainConfig& cfg);

// Rebuilds the learner a checkpoint file was saved from (the stored metadata
// carries the method and network sizes) and exposes its greedy team policy.
class CheckpointPolicy {
 public:
  explicit CheckpointPolicy(const std::string& path);

  Method method() const { return method_; }
  const nlohmann::json& meta() const { return meta_; }

  void begin_episode();
  std::vector<int> act(const Env& env);

 private:
  Method method_ = Method::vdn;
  nlohmann::json meta_;
  std::unique_ptr<QLearner> q_;
  std::unique_ptr<PgLearner> pg_;
  ActState act_state_;
  SeededRng rng_{0x9e11c0};
};

}  // namespace dragonpit::rl
