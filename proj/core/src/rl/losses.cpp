#include "dragonpit/rl/losses.hpp"

namespace dragonpit::rl {

namespace {
constexpr double kMaskPenalty = 1e9;
}

Tensor masked_log_softmax(Graph& g, Tensor logits, const Matrix& mask) {
  if (mask.rows() != logits.rows() || mask.cols() != logits.cols())
    throw TensorError("masked_log_softmax: mask shape mismatch");
  Matrix penalty = ((mask.array() - 1.0) * kMaskPenalty).matrix();
  return log_softmax_rows(add(logits, g.constant(std::move(penalty))));
}

Tensor categorical_entropy(Tensor log_probs) {
  Tensor p = exp_(log_probs);
  return scale(row_sum(mul(p, log_probs)), -1.0);
}

PpoActorLoss ppo_actor_loss(Graph& g, Tensor logp, Tensor old_logp,
                            Tensor advantages, Tensor entropy_per_row,
                            double clip_eps, double entropy_coef) {
  Tensor ratio = exp_(sub(logp, old_logp));
  Tensor surr1 = mul(ratio, advantages);
  Tensor surr2 = mul(clamp_(ratio, 1.0 - clip_eps, 1.0 + clip_eps), advantages);
  Tensor objective = mean_all(min_elem(surr1, surr2));
  Tensor entropy_mean = mean_all(entropy_per_row);

  PpoActorLoss out;
  out.entropy_mean = entropy_mean;
  out.loss = sub(scale(objective, -1.0), scale(entropy_mean, entropy_coef));

  const Matrix& r = ratio.value();
  Eigen::Index clipped = 0;
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    if (r(i, 0) < 1.0 - clip_eps || r(i, 0) > 1.0 + clip_eps) ++clipped;
  out.clip_fraction =
      r.rows() > 0 ? static_cast<double>(clipped) / static_cast<double>(r.rows())
                   : 0.0;
  return out;
}

Tensor clipped_value_loss(Graph& g, Tensor values, Tensor old_values,
                          Tensor targets, double clip_eps, double huber_delta) {
  Tensor delta = sub(values, old_values);
  Tensor clipped = add(old_values, clamp_(delta, -clip_eps, clip_eps));
  Tensor raw_err = huber(values, targets, huber_delta);
  Tensor clip_err = huber(clipped, targets, huber_delta);
  (void)g;
  return mean_all(max_elem(raw_err, clip_err));
}

}  // namespace dragonpit::rl
