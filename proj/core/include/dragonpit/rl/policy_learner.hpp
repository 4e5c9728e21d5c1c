#pragma once

#include "dragonpit/rl/buffer.hpp"
#include "dragonpit/rl/learner.hpp"
#include "dragonpit/rl/losses.hpp"
#include "dragonpit/rl/returns.hpp"

namespace dragonpit::rl {

// On-policy episode: the shared record plus the behavior log-probs the
// surrogate ratios are taken against.
struct PgEpisode {
  EpisodeRecord base;
  std::vector<std::vector<double>> logp;  // T x n_agents
};

struct PgConfig {
  bool happo = false;  // sequential per-agent updates with ratio products
  int n_agents = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int n_actions = 0;
  std::vector<int> hidden = {128, 128};
  double actor_lr = 5e-4;
  double critic_lr = 5e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int ppo_epochs = 5;
  double entropy_coef = 0.01;
  double huber_delta = 10.0;
  double grad_norm_clip = 10.0;
  bool use_value_norm = true;
  std::uint64_t seed = 0;
};

// Clipped-surrogate team learner with a centralized state-value critic.
// Plain mode updates one shared actor on all agents' rows at once; the
// sequential mode keeps one actor per agent and updates them in random
// order, multiplying each step's advantage by the product of the already
// updated agents' probability ratios.
class PgLearner {
 public:
  explicit PgLearner(PgConfig cfg);

  const PgConfig& config() const { return cfg_; }

  // Samples one action per agent (greedy takes the mode). logp_out, when
  // given, receives the behavior log-probs needed for the update.
  std::vector<int> act(const Matrix& obs, const Matrix& avail, SeededRng& rng,
                       std::vector<double>* logp_out = nullptr,
                       bool greedy = false);

  TrainStats update(const std::vector<PgEpisode>& batch);

  std::vector<Parameter*> parameters();  // actors then critic
  ValueNorm& value_norm() { return vnorm_; }
  // Critic value of one global state, de-normalized.
  double state_value(const std::vector<double>& state) const;

 private:
  Mlp& actor_for(int agent);
  Matrix actor_rows(const Matrix& obs) const;  // adds id one-hot when shared
  Matrix policy_log_probs(int agent, const Matrix& rows, const Matrix& mask) const;

  PgConfig cfg_;
  SeededRng init_rng_;
  SeededRng update_rng_;
  std::vector<Mlp> actors_;  // size 1 (shared) or n_agents (sequential)
  Mlp critic_;
  std::vector<std::vector<Parameter*>> actor_param_groups_;
  std::vector<Parameter*> critic_params_;
  std::vector<std::unique_ptr<Adam>> actor_opts_;  // one per actor group
  std::unique_ptr<Adam> critic_opt_;
  ValueNorm vnorm_;
};

}  // namespace dragonpit::rl
