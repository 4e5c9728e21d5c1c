#pragma once

#include <memory>

#include "dragonpit/rl/nets.hpp"

namespace dragonpit::rl {

inline constexpr int kMixEmbedDim = 32;
inline constexpr int kHypernetHidden = 64;
inline constexpr int kAttentionHeads = 4;
inline constexpr int kAttendDim = 32;
inline constexpr int kAdvKernels = 4;

// Everything a mixing network may consume for one batch of transitions.
// chosen_qs is [B, n_agents]; mean_qs is the per-agent mean utility over
// the actions that were legal at that step (dueling baseline, only read by
// the duplex mixer); state is [B, state_dim].
struct MixIn {
  Tensor chosen_qs;
  Tensor mean_qs;
  Tensor state;
};

struct MixInRaw {
  Matrix chosen_qs;
  Matrix mean_qs;
  Matrix state;
};

// Per-agent dueling recombination: q = v + adv[action] - mean(adv).
// Averaging over actions gives back v exactly.
double dueling_q(double v, const Eigen::RowVectorXd& adv, int action);

// Joint-value factorization head: per-agent utilities in, one Q_tot out.
class Mixer {
 public:
  virtual ~Mixer() = default;
  virtual Tensor mix(Graph& g, const MixIn& in) = 0;          // [B, 1]
  virtual Matrix mix_raw(const MixInRaw& in) const = 0;       // target path
  virtual void collect(std::vector<Parameter*>& out) = 0;
  virtual std::string kind() const = 0;
};

// Additive: Q_tot = sum_i Q_i.
class VdnMixer : public Mixer {
 public:
  Tensor mix(Graph& g, const MixIn& in) override;
  Matrix mix_raw(const MixInRaw& in) const override;
  void collect(std::vector<Parameter*>&) override {}
  std::string kind() const override { return "vdn"; }
};

// Monotone state-conditioned mixing: hypernetworks emit nonnegative weights
// for a two-layer mix of the agent utilities, plus a state value head.
class QmixMixer : public Mixer {
 public:
  QmixMixer(int state_dim, int n_agents, SeededRng& rng);
  Tensor mix(Graph& g, const MixIn& in) override;
  Matrix mix_raw(const MixInRaw& in) const override;
  void collect(std::vector<Parameter*>& out) override;
  std::string kind() const override { return "qmix"; }

 private:
  int n_agents_;
  Mlp hyper_w1_;   // state -> n_agents * embed
  Linear hyper_b1_;
  Mlp hyper_w2_;   // state -> embed
  Mlp value_;      // state -> 1
};

// Duplex dueling, mean-subtracted form:
//   Q_tot = V(s) + sum_i lambda_i(s) * (Q_i - mean_a Q_i)
// lambda comes from a bank of positive two-layer kernels and depends on the
// state only, which keeps the joint argmax aligned with the per-agent
// argmaxes (the centered advantages can be positive, so action-conditioned
// weights would break that).
class QplexMixer : public Mixer {
 public:
  QplexMixer(int state_dim, int n_agents, SeededRng& rng);
  Tensor mix(Graph& g, const MixIn& in) override;
  Matrix mix_raw(const MixInRaw& in) const override;
  void collect(std::vector<Parameter*>& out) override;
  std::string kind() const override { return "qplex"; }

  // [B, n] positive advantage weights, exposed for property tests.
  Matrix advantage_weights(const Matrix& state) const;
  // [B, 1] state-value stream.
  Matrix state_value(const Matrix& state) const;

 private:
  int n_agents_;
  Mlp value_;                 // state -> 1
  std::vector<Mlp> keys_;     // state -> 1, abs
  std::vector<Mlp> agents_;   // state -> n, sigmoid
};

// Multi-head attention over agents: per-head softmax weights from
// query(state) . key(agent features), head outputs combined with
// nonnegative per-head weights. Agent features are that agent's slice of
// the global state.
class QattenMixer : public Mixer {
 public:
  QattenMixer(int state_dim, int n_agents, SeededRng& rng);
  Tensor mix(Graph& g, const MixIn& in) override;
  Matrix mix_raw(const MixInRaw& in) const override;
  void collect(std::vector<Parameter*>& out) override;
  std::string kind() const override { return "qatten"; }

  // Per-head softmax rows over agents, [B, n] each; exposed for tests.
  std::vector<Matrix> attention_rows(const Matrix& state) const;
  // [B, heads] nonnegative head weights.
  Matrix head_weights(const Matrix& state) const;

 private:
  Matrix head_scores(int head, const Matrix& state) const;  // pre-softmax

  int n_agents_;
  int feat_dim_;
  std::vector<Mlp> queries_;   // state -> attend
  std::vector<Linear> keys_;   // agent feature -> attend
  Linear head_weight_;         // state -> heads, abs
};

std::unique_ptr<Mixer> make_mixer(const std::string& kind, int state_dim,
                                  int n_agents, SeededRng& rng);

}  // namespace dragonpit::rl
