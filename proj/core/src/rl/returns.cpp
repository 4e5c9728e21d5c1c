#include "dragonpit/rl/returns.hpp"

#include <cmath>

namespace dragonpit::rl {

double epsilon_at(long long t, double start, double finish,
                  long long anneal_steps) {
  if (anneal_steps <= 0 || t >= anneal_steps) return finish;
  if (t <= 0) return start;
  double frac = static_cast<double>(t) / static_cast<double>(anneal_steps);
  return start + (finish - start) * frac;
}

int masked_argmax(const Eigen::RowVectorXd& q, const std::vector<int>& mask) {
  if (static_cast<std::size_t>(q.size()) != mask.size())
    throw TensorError("masked_argmax: mask length mismatch");
  int best = -1;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || q(i) > q(best)) best = static_cast<int>(i);
  }
  if (best < 0) throw TensorError("masked_argmax: no legal action");
  return best;
}

double masked_mean(const Eigen::RowVectorXd& q, const std::vector<int>& mask) {
  if (static_cast<std::size_t>(q.size()) != mask.size())
    throw TensorError("masked_mean: mask length mismatch");
  double sum = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    sum += q(i);
    ++count;
  }
  if (count == 0) throw TensorError("masked_mean: no legal action");
  return sum / count;
}

int eps_greedy(const Eigen::RowVectorXd& q, const std::vector<int>& mask,
               double eps, SeededRng& rng) {
  if (rng.uniform01() < eps) {
    std::vector<int> legal;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) legal.push_back(static_cast<int>(i));
    if (legal.empty()) throw TensorError("eps_greedy: no legal action");
    return legal[static_cast<std::size_t>(rng.index(legal.size()))];
  }
  return masked_argmax(q, mask);
}

std::vector<double> td_lambda_targets(const std::vector<double>& rewards,
                                      const std::vector<double>& target_next,
                                      double gamma, double lambda,
                                      bool bootstrap_tail) {
  if (rewards.size() != target_next.size())
    throw TensorError("td_lambda_targets: length mismatch");
  const std::size_t t_len = rewards.size();
  std::vector<double> out(t_len, 0.0);
  if (t_len == 0) return out;
  double tail = bootstrap_tail ? target_next[t_len - 1] : 0.0;
  out[t_len - 1] = rewards[t_len - 1] + gamma * tail;
  for (std::size_t i = t_len - 1; i-- > 0;) {
    out[i] = rewards[i] +
             gamma * ((1.0 - lambda) * target_next[i] + lambda * out[i + 1]);
  }
  return out;
}

std::vector<double> gae_advantages(const std::vector<double>& rewards,
                                   const std::vector<double>& values,
                                   double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw TensorError("gae_advantages: need one value per state");
  std::vector<double> adv(rewards.size(), 0.0);
  double running = 0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    double delta = rewards[i] + gamma * values[i + 1] - values[i];
    running = delta + gamma * lambda * running;
    adv[i] = running;
  }
  return adv;
}

void ValueNorm::update(const std::vector<double>& xs) {
  for (double x : xs) {
    ++count_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }
}

double ValueNorm::stddev() const {
  if (count_ < 2) return 1.0;
  double var = m2_ / static_cast<double>(count_);
  return var > 1e-12 ? std::sqrt(var) : 1.0;
}

double ValueNorm::normalize(double x) const {
  return (x - mean_) / stddev();
}

double ValueNorm::denormalize(double x) const {
  return x * stddev() + mean_;
}

}  // namespace dragonpit::rl
