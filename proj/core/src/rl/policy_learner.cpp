#include "dragonpit/rl/policy_learner.hpp"

#include <cmath>
#include <numeric>

namespace dragonpit::rl {
namespace {

constexpr double kMaskPenalty = 1e9;

// Row-stable masked log-softmax on raw values.
Matrix masked_log_softmax_raw(Matrix logits, const Matrix& mask) {
  logits.array() += (mask.array() - 1.0) * kMaskPenalty;
  Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  Matrix z = (logits.array().colwise() - mx.array()).matrix();
  Eigen::VectorXd lse = z.array().exp().rowwise().sum().log();
  return (z.array().colwise() - lse.array()).matrix();
}

int sample_from_log_probs(const Eigen::RowVectorXd& logp, SeededRng& rng) {
  double u = rng.uniform01();
  double cum = 0;
  int last_positive = -1;
  for (Eigen::Index j = 0; j < logp.size(); ++j) {
    double p = std::exp(logp(j));
    if (p > 0) last_positive = static_cast<int>(j);
    cum += p;
    if (u < cum) return static_cast<int>(j);
  }
  if (last_positive < 0) throw TensorError("sample: no probability mass");
  return last_positive;
}

int argmax_row(const Eigen::RowVectorXd& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

PgLearner::PgLearner(PgConfig cfg)
    : cfg_(std::move(cfg)),
      init_rng_(mix_seed(cfg_.seed, 0x7067696eULL)),
      update_rng_(mix_seed(cfg_.seed, 0x70677570ULL)) {
  const int actor_in = cfg_.happo ? cfg_.obs_dim : cfg_.obs_dim + cfg_.n_agents;
  const int actor_count = cfg_.happo ? cfg_.n_agents : 1;
  for (int i = 0; i < actor_count; ++i) {
    actors_.emplace_back("actor" + std::to_string(i), actor_in, cfg_.hidden,
                         cfg_.n_actions, Act::tanh, init_rng_,
                         Init::orthogonal, 0.01);
  }
  critic_ = Mlp("critic", cfg_.state_dim, cfg_.hidden, 1, Act::tanh, init_rng_,
                Init::orthogonal, 1.0);

  actor_param_groups_.resize(actors_.size());
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    actors_[i].collect(actor_param_groups_[i]);
    actor_opts_.push_back(
        std::make_unique<Adam>(actor_param_groups_[i], cfg_.actor_lr));
  }
  critic_.collect(critic_params_);
  critic_opt_ = std::make_unique<Adam>(critic_params_, cfg_.critic_lr);
}

Mlp& PgLearner::actor_for(int agent) {
  return cfg_.happo ? actors_[static_cast<std::size_t>(agent)] : actors_[0];
}

Matrix PgLearner::actor_rows(const Matrix& obs) const {
  if (cfg_.happo) return obs;
  std::vector<int> ids(static_cast<std::size_t>(cfg_.n_agents));
  std::iota(ids.begin(), ids.end(), 0);
  Matrix x(obs.rows(), obs.cols() + cfg_.n_agents);
  x << obs, one_hot_rows(ids, cfg_.n_agents);
  return x;
}

Matrix PgLearner::policy_log_probs(int agent, const Matrix& rows,
                                   const Matrix& mask) const {
  const Mlp& actor =
      cfg_.happo ? actors_[static_cast<std::size_t>(agent)] : actors_[0];
  return masked_log_softmax_raw(actor.forward(rows), mask);
}

std::vector<int> PgLearner::act(const Matrix& obs, const Matrix& avail,
                                SeededRng& rng, std::vector<double>* logp_out,
                                bool greedy) {
  const int n = cfg_.n_agents;
  std::vector<int> actions(static_cast<std::size_t>(n));
  if (logp_out) logp_out->assign(static_cast<std::size_t>(n), 0.0);

  Matrix rows = actor_rows(obs);
  for (int a = 0; a < n; ++a) {
    Matrix row = rows.row(a);
    Matrix mask = avail.row(a);
    Matrix logp = policy_log_probs(a, row, mask);
    Eigen::RowVectorXd lp = logp.row(0);
    int chosen = greedy ? argmax_row(lp) : sample_from_log_probs(lp, rng);
    actions[static_cast<std::size_t>(a)] = chosen;
    if (logp_out) (*logp_out)[static_cast<std::size_t>(a)] = lp(chosen);
  }
  return actions;
}

TrainStats PgLearner::update(const std::vector<PgEpisode>& batch) {
  const int n = cfg_.n_agents;
  const int n_act = cfg_.n_actions;
  if (batch.empty()) throw TensorError("pg update: empty batch");

  // Critic values for every visited state.
  int total_states = 0;
  int total_steps = 0;
  for (const auto& ep : batch) {
    total_states += ep.base.steps() + 1;
    total_steps += ep.base.steps();
  }
  Matrix all_states(total_states, cfg_.state_dim);
  {
    int r = 0;
    for (const auto& ep : batch)
      for (const auto& s : ep.base.state) {
        for (int k = 0; k < cfg_.state_dim; ++k)
          all_states(r, k) = s[static_cast<std::size_t>(k)];
        ++r;
      }
  }
  Matrix v_raw = critic_.forward(all_states);
  std::vector<std::vector<double>> values(batch.size());
  {
    int r = 0;
    for (std::size_t e = 0; e < batch.size(); ++e) {
      const auto& ep = batch[e];
      values[e].resize(static_cast<std::size_t>(ep.base.steps()) + 1);
      for (int t = 0; t <= ep.base.steps(); ++t, ++r)
        values[e][static_cast<std::size_t>(t)] =
            cfg_.use_value_norm ? vnorm_.denormalize(v_raw(r, 0)) : v_raw(r, 0);
      if (ep.base.terminated) values[e].back() = 0.0;
    }
  }

  // Shared-reward advantages and value targets, one per transition.
  std::vector<double> adv_flat;
  std::vector<double> target_flat;
  std::vector<double> oldv_flat;
  adv_flat.reserve(static_cast<std::size_t>(total_steps));
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto& ep = batch[e];
    std::vector<double> adv =
        gae_advantages(ep.base.rewards, values[e], cfg_.gamma, cfg_.gae_lambda);
    for (int t = 0; t < ep.base.steps(); ++t) {
      adv_flat.push_back(adv[static_cast<std::size_t>(t)]);
      target_flat.push_back(adv[static_cast<std::size_t>(t)] +
                            values[e][static_cast<std::size_t>(t)]);
      oldv_flat.push_back(values[e][static_cast<std::size_t>(t)]);
    }
  }

  // Standardize advantages over the batch.
  double mean = 0, var = 0;
  for (double a : adv_flat) mean += a;
  mean /= static_cast<double>(adv_flat.size());
  for (double a : adv_flat) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv_flat.size());
  double stddev = var > 1e-12 ? std::sqrt(var) : 1.0;
  std::vector<double> adv_std(adv_flat.size());
  for (std::size_t i = 0; i < adv_flat.size(); ++i)
    adv_std[i] = (adv_flat[i] - mean) / stddev;

  if (cfg_.use_value_norm) vnorm_.update(target_flat);
  Matrix target_col(total_steps, 1);
  Matrix oldv_col(total_steps, 1);
  for (int i = 0; i < total_steps; ++i) {
    target_col(i, 0) = cfg_.use_value_norm
                           ? vnorm_.normalize(target_flat[static_cast<std::size_t>(i)])
                           : target_flat[static_cast<std::size_t>(i)];
    oldv_col(i, 0) = cfg_.use_value_norm
                         ? vnorm_.normalize(oldv_flat[static_cast<std::size_t>(i)])
                         : oldv_flat[static_cast<std::size_t>(i)];
  }

  // Per-agent row blocks, transition-major within each agent.
  std::vector<Matrix> rows_by_agent(static_cast<std::size_t>(n));
  std::vector<Matrix> mask_by_agent(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> act_by_agent(static_cast<std::size_t>(n));
  std::vector<Matrix> old_logp_by_agent(static_cast<std::size_t>(n));
  const int actor_in = cfg_.happo ? cfg_.obs_dim : cfg_.obs_dim + cfg_.n_agents;
  for (int a = 0; a < n; ++a) {
    rows_by_agent[static_cast<std::size_t>(a)] = Matrix(total_steps, actor_in);
    mask_by_agent[static_cast<std::size_t>(a)] = Matrix(total_steps, n_act);
    act_by_agent[static_cast<std::size_t>(a)].resize(
        static_cast<std::size_t>(total_steps));
    old_logp_by_agent[static_cast<std::size_t>(a)] = Matrix(total_steps, 1);
  }
  {
    int r = 0;
    for (const auto& ep : batch) {
      for (int t = 0; t < ep.base.steps(); ++t, ++r) {
        Matrix arow = actor_rows(ep.base.obs[static_cast<std::size_t>(t)]);
        for (int a = 0; a < n; ++a) {
          rows_by_agent[static_cast<std::size_t>(a)].row(r) = arow.row(a);
          mask_by_agent[static_cast<std::size_t>(a)].row(r) =
              ep.base.avail[static_cast<std::size_t>(t)].row(a);
          act_by_agent[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)] =
              ep.base.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
          old_logp_by_agent[static_cast<std::size_t>(a)](r, 0) =
              ep.logp[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
        }
      }
    }
  }

  TrainStats stats;
  stats.batch_steps = total_steps;
  double actor_loss_sum = 0, entropy_sum = 0, clip_sum = 0;
  int actor_updates = 0;

  // One PPO pass for one actor over one advantage column.
  auto ppo_pass = [&](int group, const Matrix& rows, const Matrix& mask,
                      const std::vector<int>& acts, const Matrix& old_logp,
                      const Matrix& adv_col) {
    Mlp& actor = actors_[static_cast<std::size_t>(group)];
    for (int epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
      Graph g;
      Tensor logits = actor.forward(g, g.constant(rows));
      Tensor lp_all = masked_log_softmax(g, logits, mask);
      Tensor lp = gather_cols(lp_all, acts);
      Tensor ent = categorical_entropy(lp_all);
      PpoActorLoss al =
          ppo_actor_loss(g, lp, g.constant(old_logp), g.constant(adv_col), ent,
                         cfg_.clip_eps, cfg_.entropy_coef);
      actor_opts_[static_cast<std::size_t>(group)]->zero_grad();
      g.backward(al.loss);
      clip_grad_norm(actor_param_groups_[static_cast<std::size_t>(group)],
                     cfg_.grad_norm_clip);
      actor_opts_[static_cast<std::size_t>(group)]->step();
      if (epoch == cfg_.ppo_epochs - 1) {
        actor_loss_sum += al.loss.value()(0, 0);
        entropy_sum += al.entropy_mean.value()(0, 0);
        clip_sum += al.clip_fraction;
        ++actor_updates;
      }
    }
  };

  if (!cfg_.happo) {
    // All agents' rows through the one shared actor at once.
    Matrix rows(total_steps * n, actor_in);
    Matrix mask(total_steps * n, n_act);
    Matrix old_logp(total_steps * n, 1);
    Matrix adv_col(total_steps * n, 1);
    std::vector<int> acts(static_cast<std::size_t>(total_steps * n));
    for (int a = 0; a < n; ++a) {
      rows.middleRows(a * total_steps, total_steps) =
          rows_by_agent[static_cast<std::size_t>(a)];
      mask.middleRows(a * total_steps, total_steps) =
          mask_by_agent[static_cast<std::size_t>(a)];
      old_logp.middleRows(a * total_steps, total_steps) =
          old_logp_by_agent[static_cast<std::size_t>(a)];
      for (int r = 0; r < total_steps; ++r) {
        adv_col(a * total_steps + r, 0) = adv_std[static_cast<std::size_t>(r)];
        acts[static_cast<std::size_t>(a * total_steps + r)] =
            act_by_agent[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)];
      }
    }
    ppo_pass(0, rows, mask, acts, old_logp, adv_col);
  } else {
    // Sequential per-agent updates; each agent sees the advantage reweighted
    // by the already-updated agents' probability ratios.
    Eigen::VectorXd factor = Eigen::VectorXd::Ones(total_steps);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    update_rng_.shuffle(order);
    for (int agent : order) {
      const auto a = static_cast<std::size_t>(agent);
      Matrix adv_col(total_steps, 1);
      for (int r = 0; r < total_steps; ++r)
        adv_col(r, 0) = adv_std[static_cast<std::size_t>(r)] * factor(r);
      ppo_pass(agent, rows_by_agent[a], mask_by_agent[a], act_by_agent[a],
               old_logp_by_agent[a], adv_col);
      Matrix lp_new =
          policy_log_probs(agent, rows_by_agent[a], mask_by_agent[a]);
      for (int r = 0; r < total_steps; ++r) {
        int chosen = act_by_agent[a][static_cast<std::size_t>(r)];
        factor(r) *= std::exp(lp_new(r, chosen) - old_logp_by_agent[a](r, 0));
      }
    }
  }

  // Critic regression on the (possibly normalized) lambda-free GAE targets.
  Matrix state_rows(total_steps, cfg_.state_dim);
  {
    int r = 0;
    for (const auto& ep : batch)
      for (int t = 0; t < ep.base.steps(); ++t, ++r)
        for (int k = 0; k < cfg_.state_dim; ++k)
          state_rows(r, k) =
              ep.base.state[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
  }
  double value_loss_last = 0;
  for (int epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
    Graph g;
    Tensor v = critic_.forward(g, g.constant(state_rows));
    Tensor vloss =
        clipped_value_loss(g, v, g.constant(oldv_col), g.constant(target_col),
                           cfg_.clip_eps, cfg_.huber_delta);
    critic_opt_->zero_grad();
    g.backward(vloss);
    double norm = clip_grad_norm(critic_params_, cfg_.grad_norm_clip);
    critic_opt_->step();
    if (epoch == cfg_.ppo_epochs - 1) {
      value_loss_last = vloss.value()(0, 0);
      stats.grad_norm = norm;
    }
  }

  stats.loss = actor_loss_sum / std::max(actor_updates, 1) + value_loss_last;
  stats.entropy = entropy_sum / std::max(actor_updates, 1);
  stats.clip_fraction = clip_sum / std::max(actor_updates, 1);
  double v_mean = 0;
  for (double v : oldv_flat) v_mean += v;
  stats.mean_q = v_mean / static_cast<double>(oldv_flat.size());
  double t_mean = 0;
  for (double t : target_flat) t_mean += t;
  stats.mean_target = t_mean / static_cast<double>(target_flat.size());
  return stats;
}

std::vector<Parameter*> PgLearner::parameters() {
  std::vector<Parameter*> out;
  for (auto& group : actor_param_groups_)
    out.insert(out.end(), group.begin(), group.end());
  out.insert(out.end(), critic_params_.begin(), critic_params_.end());
  return out;
}

double PgLearner::state_value(const std::vector<double>& state) const {
  Matrix row(1, cfg_.state_dim);
  for (int k = 0; k < cfg_.state_dim; ++k)
    row(0, k) = state[static_cast<std::size_t>(k)];
  double v = critic_.forward(row)(0, 0);
  return cfg_.use_value_norm ? vnorm_.denormalize(v) : v;
}

}  // namespace dragonpit::rl
