#pragma once

#include "dragonpit/rl/tensor.hpp"
#include "dragonpit/rng.hpp"

namespace dragonpit::rl {

// Linear exploration decay: start at t = 0, finish from anneal_steps on.
double epsilon_at(long long t, double start, double finish,
                  long long anneal_steps);

// Greedy action among mask == 1 entries; lowest index wins ties.
// Throws TensorError if nothing is legal.
int masked_argmax(const Eigen::RowVectorXd& q, const std::vector<int>& mask);

// Mean of q over mask == 1 entries. Throws TensorError if nothing is legal.
double masked_mean(const Eigen::RowVectorXd& q, const std::vector<int>& mask);

// Epsilon-greedy over the legal set.
int eps_greedy(const Eigen::RowVectorXd& q, const std::vector<int>& mask,
               double eps, SeededRng& rng);

// Backward TD(lambda) returns for one episode.
// rewards[t] pays for transition t; target_next[t] is the bootstrap value at
// the successor state of transition t. bootstrap_tail keeps the final
// successor's value (time-limit truncation); a real terminal drops it.
std::vector<double> td_lambda_targets(const std::vector<double>& rewards,
                                      const std::vector<double>& target_next,
                                      double gamma, double lambda,
                                      bool bootstrap_tail);

// Generalized advantage estimates for one episode.
// values has length T + 1 (critic value of every visited state, including the
// final one; callers zero the tail on termination).
std::vector<double> gae_advantages(const std::vector<double>& rewards,
                                   const std::vector<double>& values,
                                   double gamma, double lambda);

// Running mean/variance normalizer for value targets. The critic is trained
// in normalized space; denormalize() maps its outputs back.
class ValueNorm {
 public:
  void update(const std::vector<double>& xs);
  double normalize(double x) const;
  double denormalize(double x) const;
  double mean() const { return mean_; }
  double stddev() const;
  long long count() const { return count_; }

 private:
  double mean_ = 0;
  double m2_ = 0;
  long long count_ = 0;
};

}  // namespace dragonpit::rl
