#include "dragonpit/rl/returns.hpp"

#include <cmath>

#include "doctest.h"
#include "dragonpit/rl/nets.hpp"

using namespace dragonpit::rl;
using dragonpit::SeededRng;

namespace {

// Forward-view oracle: the lambda-weighted average of every n-step return.
// target_next[j] is the bootstrap value at the successor of transition j.
std::vector<double> lambda_returns_oracle(const std::vector<double>& rewards,
                                          const std::vector<double>& target_next,
                                          double gamma, double lambda,
                                          bool bootstrap_tail) {
  const int t_len = static_cast<int>(rewards.size());
  std::vector<double> out(rewards.size(), 0.0);
  for (int t = 0; t < t_len; ++t) {
    const int max_n = t_len - 1 - t;  // n-step returns before the full one
    double acc = 0;
    for (int n = 1; n <= max_n; ++n) {
      double g_n = 0;
      for (int k = 0; k < n; ++k)
        g_n += std::pow(gamma, k) * rewards[static_cast<std::size_t>(t + k)];
      g_n += std::pow(gamma, n) *
             target_next[static_cast<std::size_t>(t + n - 1)];
      acc += (1.0 - lambda) * std::pow(lambda, n - 1) * g_n;
    }
    double g_full = 0;
    for (int k = 0; t + k < t_len; ++k)
      g_full += std::pow(gamma, k) * rewards[static_cast<std::size_t>(t + k)];
    if (bootstrap_tail)
      g_full += std::pow(gamma, t_len - t) * target_next.back();
    acc += std::pow(lambda, max_n) * g_full;
    out[static_cast<std::size_t>(t)] = acc;
  }
  return out;
}

// Direct discounted sum of future temporal-difference errors.
std::vector<double> gae_oracle(const std::vector<double>& rewards,
                               const std::vector<double>& values, double gamma,
                               double lambda) {
  const std::size_t t_len = rewards.size();
  std::vector<double> adv(t_len, 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    double acc = 0;
    for (std::size_t k = t; k < t_len; ++k) {
      double delta = rewards[k] + gamma * values[k + 1] - values[k];
      acc += std::pow(gamma * lambda, static_cast<double>(k - t)) * delta;
    }
    adv[t] = acc;
  }
  return adv;
}

}  // namespace

TEST_SUITE_BEGIN("returns");

TEST_CASE("exploration schedule is linear with clamped ends") {
  CHECK(epsilon_at(0, 1.0, 0.05, 100000) == 1.0);
  CHECK(epsilon_at(-5, 1.0, 0.05, 100000) == 1.0);
  CHECK(epsilon_at(50000, 1.0, 0.05, 100000) == doctest::Approx(0.525));
  CHECK(epsilon_at(100000, 1.0, 0.05, 100000) == 0.05);
  CHECK(epsilon_at(900000, 1.0, 0.05, 100000) == 0.05);
  CHECK(epsilon_at(10, 1.0, 0.05, 0) == 0.05);
  CHECK(epsilon_at(25, 0.3, 0.3, 100) == doctest::Approx(0.3));
}

TEST_CASE("masked selection helpers") {
  Eigen::RowVectorXd q(4);
  q << 1.0, 5.0, 5.0, -3.0;

  CHECK(masked_argmax(q, {1, 1, 1, 1}) == 1);  // tie: lowest index wins
  CHECK(masked_argmax(q, {1, 0, 1, 1}) == 2);
  CHECK(masked_argmax(q, {1, 0, 0, 1}) == 0);
  CHECK(masked_argmax(q, {0, 0, 0, 1}) == 3);
  CHECK_THROWS_AS(masked_argmax(q, {0, 0, 0, 0}), TensorError);
  CHECK_THROWS_AS(masked_argmax(q, {1, 1}), TensorError);

  CHECK(masked_mean(q, {1, 1, 1, 1}) == doctest::Approx(2.0));
  CHECK(masked_mean(q, {0, 1, 0, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(masked_mean(q, {0, 0, 0, 0}), TensorError);
  CHECK_THROWS_AS(masked_mean(q, {1}), TensorError);
}

TEST_CASE("epsilon-greedy splits between argmax and uniform exploration") {
  Eigen::RowVectorXd q(4);
  q << 0.0, 9.0, 1.0, 2.0;
  std::vector<int> mask{1, 0, 1, 1};
  SeededRng rng(77);

  for (int i = 0; i < 20; ++i) CHECK(eps_greedy(q, mask, 0.0, rng) == 3);

  std::vector<int> hits(4, 0);
  for (int i = 0; i < 3000; ++i) ++hits[static_cast<std::size_t>(
      eps_greedy(q, mask, 1.0, rng))];
  CHECK(hits[1] == 0);  // illegal action never sampled
  CHECK(hits[0] > 800);
  CHECK(hits[2] > 800);
  CHECK(hits[3] > 800);

  CHECK_THROWS_AS(eps_greedy(q, {0, 0, 0, 0}, 1.0, rng), TensorError);
}

TEST_CASE("lambda returns match the forward-view oracle") {
  SeededRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t t_len = 1 + static_cast<std::size_t>(rng.index(12));
    std::vector<double> rewards(t_len), target_next(t_len);
    for (std::size_t i = 0; i < t_len; ++i) {
      rewards[i] = rng.uniform01() * 2.0 - 1.0;
      target_next[i] = rng.uniform01() * 2.0 - 1.0;
    }
    for (double lambda : {0.0, 0.3, 0.6, 0.95, 1.0}) {
      for (bool tail : {false, true}) {
        auto got = td_lambda_targets(rewards, target_next, 0.97, lambda, tail);
        auto want =
            lambda_returns_oracle(rewards, target_next, 0.97, lambda, tail);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i)
          CHECK(std::abs(got[i] - want[i]) <= 1e-10);
      }
    }
  }
}

TEST_CASE("lambda limits: one-step targets and full returns") {
  std::vector<double> rewards{1.0, 2.0, 3.0};
  std::vector<double> next{10.0, 20.0, 30.0};
  double gamma = 0.9;

  auto one_step = td_lambda_targets(rewards, next, gamma, 0.0, true);
  CHECK(one_step[0] == doctest::Approx(1.0 + gamma * 10.0));
  CHECK(one_step[1] == doctest::Approx(2.0 + gamma * 20.0));
  CHECK(one_step[2] == doctest::Approx(3.0 + gamma * 30.0));

  auto monte_carlo = td_lambda_targets(rewards, next, gamma, 1.0, false);
  CHECK(monte_carlo[2] == doctest::Approx(3.0));
  CHECK(monte_carlo[1] == doctest::Approx(2.0 + gamma * 3.0));
  CHECK(monte_carlo[0] == doctest::Approx(1.0 + gamma * (2.0 + gamma * 3.0)));

  // A real terminal drops the tail; truncation keeps it.
  auto truncated = td_lambda_targets({1.0}, {5.0}, gamma, 0.6, true);
  CHECK(truncated[0] == doctest::Approx(1.0 + gamma * 5.0));
  auto terminal = td_lambda_targets({1.0}, {5.0}, gamma, 0.6, false);
  CHECK(terminal[0] == doctest::Approx(1.0));

  CHECK(td_lambda_targets({}, {}, gamma, 0.6, true).empty());
  CHECK_THROWS_AS(td_lambda_targets({1.0}, {1.0, 2.0}, gamma, 0.6, true),
                  TensorError);
}

TEST_CASE("advantage estimates match the discounted delta sum") {
  SeededRng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t t_len = 1 + static_cast<std::size_t>(rng.index(12));
    std::vector<double> rewards(t_len), values(t_len + 1);
    for (std::size_t i = 0; i < t_len; ++i)
      rewards[i] = rng.uniform01() * 2.0 - 1.0;
    for (std::size_t i = 0; i <= t_len; ++i)
      values[i] = rng.uniform01() * 2.0 - 1.0;
    for (double lambda : {0.0, 0.5, 0.95, 1.0}) {
      auto got = gae_advantages(rewards, values, 0.99, lambda);
      auto want = gae_oracle(rewards, values, 0.99, lambda);
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) <= 1e-10);
    }
  }

  // lambda = 0 reduces to the one-step error.
  std::vector<double> r{1.0, -1.0};
  std::vector<double> v{0.5, 0.25, 0.125};
  auto adv = gae_advantages(r, v, 0.9, 0.0);
  CHECK(adv[0] == doctest::Approx(1.0 + 0.9 * 0.25 - 0.5));
  CHECK(adv[1] == doctest::Approx(-1.0 + 0.9 * 0.125 - 0.25));

  CHECK_THROWS_AS(gae_advantages(r, {0.5, 0.25}, 0.9, 0.5), TensorError);
}

TEST_CASE("value normalizer tracks running moments") {
  ValueNorm norm;
  CHECK(norm.stddev() == 1.0);  // degenerate before two samples
  CHECK(norm.normalize(3.0) == 3.0);

  std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  norm.update(xs);
  CHECK(norm.count() == 8);
  CHECK(norm.mean() == doctest::Approx(4.5));
  double var = 0;
  for (double x : xs) var += (x - 4.5) * (x - 4.5);
  var /= 8.0;
  CHECK(norm.stddev() == doctest::Approx(std::sqrt(var)));

  double z = norm.normalize(7.0);
  CHECK(norm.denormalize(z) == doctest::Approx(7.0));
  CHECK(norm.normalize(norm.mean()) == doctest::Approx(0.0));

  // Incremental updates agree with one batch.
  ValueNorm split;
  split.update({1.0, 2.0, 3.0, 4.0});
  split.update({5.0, 6.0, 7.0, 8.0});
  CHECK(split.mean() == doctest::Approx(norm.mean()));
  CHECK(split.stddev() == doctest::Approx(norm.stddev()));

  // Constant targets keep the scale pinned at one.
  ValueNorm flat;
  flat.update({2.0, 2.0, 2.0});
  CHECK(flat.stddev() == 1.0);
}

TEST_SUITE_END();
