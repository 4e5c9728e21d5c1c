#pragma once

#include "dragonpit/rl/tensor.hpp"

namespace dragonpit::rl {

inline Tensor max_elem(Tensor a, Tensor b) {
  return scale(min_elem(scale(a, -1.0), scale(b, -1.0)), -1.0);
}

// Log-probabilities of a masked categorical head: illegal logits are pushed
// to a large negative constant before the row-wise log-softmax.
// mask is [N, A] with entries in {0, 1}; every row needs at least one 1.
Tensor masked_log_softmax(Graph& g, Tensor logits, const Matrix& mask);

// Per-row entropy of a categorical given log-probabilities. [N, A] -> [N, 1].
Tensor categorical_entropy(Tensor log_probs);

struct PpoActorLoss {
  Tensor loss;           // scalar objective to minimize
  Tensor entropy_mean;   // scalar, diagnostic
  double clip_fraction;  // share of rows where the clipped branch was active
};

// Clipped surrogate objective. logp/old_logp/advantages are [N, 1];
// entropy_per_row is [N, 1]. advantages and old_logp should carry no
// gradient (feed constants).
PpoActorLoss ppo_actor_loss(Graph& g, Tensor logp, Tensor old_logp,
                            Tensor advantages, Tensor entropy_per_row,
                            double clip_eps, double entropy_coef);

// Clipped value regression with a huber kernel:
// max(huber(v, y), huber(old_v + clamp(v - old_v), y)), averaged.
Tensor clipped_value_loss(Graph& g, Tensor values, Tensor old_values,
                          Tensor targets, double clip_eps, double huber_delta);

}  // namespace dragonpit::rl
