#include "dragonpit/rl/learner.hpp"

#include <numeric>

namespace dragonpit::rl {

Matrix one_hot_rows(const std::vector<int>& ids, int n) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= 0) {
      if (ids[i] >= n) throw TensorError("one_hot_rows: id out of range");
      out(static_cast<Eigen::Index>(i), ids[i]) = 1.0;
    }
  }
  return out;
}

namespace {

std::vector<int> mask_row(const Matrix& avail, Eigen::Index row) {
  std::vector<int> m(static_cast<std::size_t>(avail.cols()));
  for (Eigen::Index c = 0; c < avail.cols(); ++c)
    m[static_cast<std::size_t>(c)] = avail(row, c) != 0 ? 1 : 0;
  return m;
}

}  // namespace

QLearner::QLearner(QLearnerConfig cfg)
    : cfg_(std::move(cfg)), init_rng_(mix_seed(cfg_.seed, 0x6c6561726eULL)) {
  online_ = AgentNet("agent", agent_input_dim(), cfg_.rnn_hidden,
                     cfg_.n_actions, init_rng_);
  target_ = AgentNet("agent_t", agent_input_dim(), cfg_.rnn_hidden,
                     cfg_.n_actions, init_rng_);
  mixer_ = make_mixer(cfg_.mixer, cfg_.state_dim, cfg_.n_agents, init_rng_);
  target_mixer_ = make_mixer(cfg_.mixer, cfg_.state_dim, cfg_.n_agents,
                             init_rng_);
  online_.collect(online_params_);
  mixer_->collect(online_params_);
  target_.collect(target_params_);
  target_mixer_->collect(target_params_);
  opt_ = std::make_unique<Adam>(online_params_, cfg_.lr);
  sync_targets();
}

int QLearner::agent_input_dim() const {
  return cfg_.obs_dim + cfg_.n_actions + cfg_.n_agents;
}

ActState QLearner::init_act_state() const {
  ActState st;
  st.hidden = Matrix::Zero(cfg_.n_agents, cfg_.rnn_hidden);
  st.last_actions.assign(static_cast<std::size_t>(cfg_.n_agents), -1);
  return st;
}

Matrix QLearner::agent_inputs(const Matrix& obs,
                              const std::vector<int>& last_actions) const {
  const int n = cfg_.n_agents;
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  Matrix x(n, agent_input_dim());
  x << obs, one_hot_rows(last_actions, cfg_.n_actions), one_hot_rows(ids, n);
  return x;
}

std::vector<int> QLearner::act(const Matrix& obs, const Matrix& avail,
                               ActState& st, double eps, SeededRng& rng) const {
  Matrix x = agent_inputs(obs, st.last_actions);
  auto [q, h_next] = online_.forward(x, st.hidden);
  std::vector<int> actions(static_cast<std::size_t>(cfg_.n_agents));
  for (int a = 0; a < cfg_.n_agents; ++a) {
    Eigen::RowVectorXd row = q.row(a);
    actions[static_cast<std::size_t>(a)] =
        eps_greedy(row, mask_row(avail, a), eps, rng);
  }
  st.hidden = h_next;
  st.last_actions = actions;
  return actions;
}

TrainStats QLearner::train(const std::vector<const EpisodeRecord*>& batch) {
  const int batch_n = static_cast<int>(batch.size());
  const int n = cfg_.n_agents;
  const int n_act = cfg_.n_actions;
  const int state_dim = cfg_.state_dim;
  if (batch_n == 0) throw TensorError("train: empty batch");

  int max_t = 0;
  for (const auto* ep : batch) max_t = std::max(max_t, ep->steps());

  // Shared input layout: row (b * n + a) at each state index t.
  std::vector<Matrix> inputs(static_cast<std::size_t>(max_t) + 1);
  std::vector<Matrix> states(static_cast<std::size_t>(max_t) + 1);
  for (int t = 0; t <= max_t; ++t) {
    Matrix x = Matrix::Zero(batch_n * n, agent_input_dim());
    Matrix s = Matrix::Zero(batch_n, state_dim);
    for (int b = 0; b < batch_n; ++b) {
      const EpisodeRecord& ep = *batch[static_cast<std::size_t>(b)];
      if (t > ep.steps()) continue;
      std::vector<int> last(static_cast<std::size_t>(n), -1);
      if (t > 0) last = ep.actions[static_cast<std::size_t>(t) - 1];
      x.middleRows(b * n, n) =
          agent_inputs(ep.obs[static_cast<std::size_t>(t)], last);
      for (int k = 0; k < state_dim; ++k)
        s(b, k) = ep.state[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    }
    inputs[static_cast<std::size_t>(t)] = std::move(x);
    states[static_cast<std::size_t>(t)] = std::move(s);
  }

  // Online pass (differentiable) over every visited state.
  Graph g;
  Tensor h = g.constant(Matrix::Zero(batch_n * n, cfg_.rnn_hidden));
  std::vector<Tensor> qs;
  qs.reserve(static_cast<std::size_t>(max_t) + 1);
  for (int t = 0; t <= max_t; ++t) {
    auto [q, h_next] =
        online_.forward(g, g.constant(inputs[static_cast<std::size_t>(t)]), h);
    qs.push_back(q);
    h = h_next;
  }

  // Target pass, no gradients.
  std::vector<Matrix> tqs(static_cast<std::size_t>(max_t) + 1);
  {
    Matrix th = Matrix::Zero(batch_n * n, cfg_.rnn_hidden);
    for (int t = 0; t <= max_t; ++t) {
      auto [tq, th_next] = target_.forward(inputs[static_cast<std::size_t>(t)], th);
      tqs[static_cast<std::size_t>(t)] = std::move(tq);
      th = th_next;
    }
  }

  // Bootstrap values: target net at the online argmax (double estimator).
  const bool wants_mean = mixer_->kind() == "qplex";
  std::vector<Matrix> target_tot(static_cast<std::size_t>(max_t) + 1);
  for (int t = 1; t <= max_t; ++t) {
    Matrix chosen = Matrix::Zero(batch_n, n);
    Matrix meanq = Matrix::Zero(batch_n, n);
    for (int b = 0; b < batch_n; ++b) {
      const EpisodeRecord& ep = *batch[static_cast<std::size_t>(b)];
      if (t > ep.steps()) continue;
      for (int a = 0; a < n; ++a) {
        Eigen::Index row = b * n + a;
        std::vector<int> m = mask_row(ep.avail[static_cast<std::size_t>(t)], a);
        Eigen::RowVectorXd online_row = qs[static_cast<std::size_t>(t)].value().row(row);
        Eigen::RowVectorXd target_row = tqs[static_cast<std::size_t>(t)].row(row);
        chosen(b, a) = target_row(masked_argmax(online_row, m));
        if (wants_mean) meanq(b, a) = masked_mean(target_row, m);
      }
    }
    MixInRaw in;
    in.chosen_qs = std::move(chosen);
    in.mean_qs = std::move(meanq);
    in.state = states[static_cast<std::size_t>(t)];
    target_tot[static_cast<std::size_t>(t)] = target_mixer_->mix_raw(in);
  }

  // Per-episode lambda returns.
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(batch_n));
  for (int b = 0; b < batch_n; ++b) {
    const EpisodeRecord& ep = *batch[static_cast<std::size_t>(b)];
    std::vector<double> target_next(static_cast<std::size_t>(ep.steps()));
    for (int t = 0; t < ep.steps(); ++t)
      target_next[static_cast<std::size_t>(t)] =
          target_tot[static_cast<std::size_t>(t) + 1](b, 0);
    ys[static_cast<std::size_t>(b)] =
        td_lambda_targets(ep.rewards, target_next, cfg_.gamma, cfg_.td_lambda,
                          /*bootstrap_tail=*/!ep.terminated);
  }

  // Masked squared TD error over all transitions.
  Tensor loss_sum{};
  double filled_total = 0;
  double q_sum = 0;
  double y_sum = 0;
  for (int t = 0; t < max_t; ++t) {
    std::vector<int> act_idx(static_cast<std::size_t>(batch_n * n), 0);
    Matrix y_col = Matrix::Zero(batch_n, 1);
    Matrix filled = Matrix::Zero(batch_n, 1);
    Matrix legal = Matrix::Zero(batch_n * n, n_act);
    Matrix inv_count = Matrix::Zero(batch_n * n, 1);
    for (int b = 0; b < batch_n; ++b) {
      const EpisodeRecord& ep = *batch[static_cast<std::size_t>(b)];
      if (t >= ep.steps()) continue;
      filled(b, 0) = 1.0;
      y_col(b, 0) = ys[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)];
      for (int a = 0; a < n; ++a) {
        int act = ep.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
        act_idx[static_cast<std::size_t>(b * n + a)] = act;
        if (wants_mean) {
          int count = 0;
          for (int c = 0; c < n_act; ++c) {
            if (ep.avail[static_cast<std::size_t>(t)](a, c) != 0) {
              legal(b * n + a, c) = 1.0;
              ++count;
            }
          }
          inv_count(b * n + a, 0) = count > 0 ? 1.0 / count : 0.0;
        }
      }
    }
    Tensor gathered = gather_cols(qs[static_cast<std::size_t>(t)], act_idx);
    MixIn in;
    in.chosen_qs = group_rows(gathered, n);  // [B, n]
    if (wants_mean) {
      Tensor sums = row_sum(mul(qs[static_cast<std::size_t>(t)],
                                g.constant(std::move(legal))));
      Tensor means = mul(sums, g.constant(std::move(inv_count)));
      in.mean_qs = group_rows(means, n);
    }
    in.state = g.constant(states[static_cast<std::size_t>(t)]);
    Tensor q_tot = mixer_->mix(g, in);

    Tensor diff = sub(q_tot, g.constant(y_col));
    Tensor masked = mul(mul(diff, diff), g.constant(filled));
    Tensor partial = sum_all(masked);
    loss_sum = t == 0 ? partial : add(loss_sum, partial);

    for (int b = 0; b < batch_n; ++b) {
      if (filled(b, 0) == 0) continue;
      filled_total += 1;
      q_sum += q_tot.value()(b, 0);
      y_sum += y_col(b, 0);
    }
  }
  if (filled_total == 0) throw TensorError("train: batch has no transitions");

  Tensor loss = scale(loss_sum, 1.0 / filled_total);
  opt_->zero_grad();
  g.backward(loss);
  double norm = clip_grad_norm(online_params_, cfg_.grad_norm_clip);
  opt_->step();

  ++updates_;
  if (cfg_.target_update_interval > 0 &&
      updates_ % cfg_.target_update_interval == 0)
    sync_targets();

  TrainStats stats;
  stats.loss = loss.value()(0, 0);
  stats.grad_norm = norm;
  stats.mean_q = q_sum / filled_total;
  stats.mean_target = y_sum / filled_total;
  stats.batch_steps = static_cast<int>(filled_total);
  return stats;
}

void QLearner::sync_targets() { copy_values(online_params_, target_params_); }

std::vector<Parameter*> QLearner::parameters() { return online_params_; }

}  // namespace dragonpit::rl
