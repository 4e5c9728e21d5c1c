#pragma once

#include "dragonpit/rl/buffer.hpp"
#include "dragonpit/rl/mixers.hpp"
#include "dragonpit/rl/returns.hpp"

namespace dragonpit::rl {

// One-hot rows: out[i, ids[i]] = 1. Negative ids give an all-zero row.
Matrix one_hot_rows(const std::vector<int>& ids, int n);

struct TrainStats {
  double loss = 0;
  double grad_norm = 0;
  double mean_q = 0;
  double mean_target = 0;
  double entropy = 0;        // policy-gradient methods only
  double clip_fraction = 0;  // policy-gradient methods only
  int batch_steps = 0;
};

struct QLearnerConfig {
  std::string mixer = "vdn";
  int n_agents = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int n_actions = 0;
  int rnn_hidden = 64;
  double lr = 1e-3;
  double gamma = 0.99;
  double td_lambda = 0.6;
  double grad_norm_clip = 10.0;
  int target_update_interval = 200;  // in gradient updates
  std::uint64_t seed = 0;
};

// Recurrent per-episode action state for one team.
struct ActState {
  Matrix hidden;                  // [n_agents, rnn_hidden]
  std::vector<int> last_actions;  // -1 before the first step
};

// Value-decomposition learner: shared recurrent per-agent net, a mixing head
// over the chosen utilities, TD(lambda) targets from a target copy with
// greedy actions picked by the online net.
class QLearner {
 public:
  explicit QLearner(QLearnerConfig cfg);

  const QLearnerConfig& config() const { return cfg_; }
  int agent_input_dim() const;

  ActState init_act_state() const;
  // Per-agent epsilon-greedy actions; advances the recurrent state.
  std::vector<int> act(const Matrix& obs, const Matrix& avail, ActState& st,
                       double eps, SeededRng& rng) const;

  TrainStats train(const std::vector<const EpisodeRecord*>& batch);
  void sync_targets();
  long long updates() const { return updates_; }

  std::vector<Parameter*> parameters();  // online net + mixer
  AgentNet& agent_net() { return online_; }
  Mixer& mixer() { return *mixer_; }

  // Agent-net input row for one agent: obs, last-action one-hot, id one-hot.
  Matrix agent_inputs(const Matrix& obs, const std::vector<int>& last_actions) const;

 private:
  QLearnerConfig cfg_;
  SeededRng init_rng_;
  AgentNet online_;
  AgentNet target_;
  std::unique_ptr<Mixer> mixer_;
  std::unique_ptr<Mixer> target_mixer_;
  std::vector<Parameter*> online_params_;
  std::vector<Parameter*> target_params_;
  std::unique_ptr<Adam> opt_;
  long long updates_ = 0;
};

}  // namespace dragonpit::rl
