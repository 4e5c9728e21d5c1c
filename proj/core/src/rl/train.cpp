#include "dragonpit/rl/train.hpp"

#include "dragonpit/rl/checkpoint.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace dragonpit::rl {

Method method_from_string(const std::string& name) {
  if (name == "vdn") return Method::vdn;
  if (name == "qmix") return Method::qmix;
  if (name == "qplex") return Method::qplex;
  if (name == "qatten") return Method::qatten;
  if (name == "mappo") return Method::mappo;
  if (name == "happo") return Method::happo;
  throw TensorError("unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::vdn: return "vdn";
    case Method::qmix: return "qmix";
    case Method::qplex: return "qplex";
    case Method::qatten: return "qatten";
    case Method::mappo: return "mappo";
    case Method::happo: return "happo";
  }
  return "?";
}

bool is_value_method(Method m) {
  return m == Method::vdn || m == Method::qmix || m == Method::qplex ||
         m == Method::qatten;
}

std::vector<Method> all_methods() {
  return {Method::vdn,    Method::qmix,  Method::qplex,
          Method::qatten, Method::mappo, Method::happo};
}

Matrix env_obs_matrix(const Env& env) {
  auto obs = env.get_obs();
  Matrix m(static_cast<Eigen::Index>(obs.size()), env.obs_dim());
  for (std::size_t a = 0; a < obs.size(); ++a)
    for (int k = 0; k < env.obs_dim(); ++k)
      m(static_cast<Eigen::Index>(a), k) = obs[a][static_cast<std::size_t>(k)];
  return m;
}

Matrix env_avail_matrix(const Env& env) {
  auto avail = env.get_avail_actions();
  Matrix m(static_cast<Eigen::Index>(avail.size()), kNumActions);
  for (std::size_t a = 0; a < avail.size(); ++a)
    for (int k = 0; k < kNumActions; ++k)
      m(static_cast<Eigen::Index>(a), k) = avail[a][static_cast<std::size_t>(k)];
  return m;
}

namespace {

struct EpisodeOutcome {
  double episode_return = 0;
  long long damage = 0;
  bool killed = false;
  int steps = 0;
};

// Exploration schedule sampled per env step.
struct EpsSchedule {
  double start, finish;
  long long anneal;
  double at(long long t) const { return epsilon_at(t, start, finish, anneal); }
};

EpisodeOutcome run_q_episode(Env& env, const QLearner& learner,
                             std::uint64_t seed, const EpsSchedule* eps,
                             long long t_env, SeededRng& rng,
                             EpisodeRecord* record) {
  env.reset(seed);
  EpisodeOutcome out;
  if (record) {
    *record = EpisodeRecord{};
    record->seed = seed;
  }
  ActState st = learner.init_act_state();
  while (env.episode_active()) {
    Matrix obs = env_obs_matrix(env);
    Matrix avail = env_avail_matrix(env);
    double e = eps ? eps->at(t_env + out.steps) : 0.0;
    std::vector<int> actions = learner.act(obs, avail, st, e, rng);
    if (record) {
      record->obs.push_back(obs);
      record->state.push_back(env.get_state());
      record->avail.push_back(avail);
      record->actions.push_back(actions);
    }
    StepResult r = env.step(actions);
    out.episode_return += r.reward;
    out.damage += r.step_damage;
    out.killed = out.killed || r.terminated;
    ++out.steps;
    if (record) record->rewards.push_back(r.reward);
  }
  if (record) {
    record->obs.push_back(env_obs_matrix(env));
    record->state.push_back(env.get_state());
    record->avail.push_back(env_avail_matrix(env));
    record->terminated = out.killed;
  }
  return out;
}

EpisodeOutcome run_pg_episode(Env& env, PgLearner& learner, std::uint64_t seed,
                              bool greedy, SeededRng& rng, PgEpisode* record) {
  env.reset(seed);
  EpisodeOutcome out;
  if (record) {
    *record = PgEpisode{};
    record->base.seed = seed;
  }
  while (env.episode_active()) {
    Matrix obs = env_obs_matrix(env);
    Matrix avail = env_avail_matrix(env);
    std::vector<double> logp;
    std::vector<int> actions =
        learner.act(obs, avail, rng, record ? &logp : nullptr, greedy);
    if (record) {
      record->base.obs.push_back(obs);
      record->base.state.push_back(env.get_state());
      record->base.avail.push_back(avail);
      record->base.actions.push_back(actions);
      record->logp.push_back(logp);
    }
    StepResult r = env.step(actions);
    out.episode_return += r.reward;
    out.damage += r.step_damage;
    out.killed = out.killed || r.terminated;
    ++out.steps;
    if (record) record->base.rewards.push_back(r.reward);
  }
  if (record) {
    record->base.obs.push_back(env_obs_matrix(env));
    record->base.state.push_back(env.get_state());
    record->base.avail.push_back(env_avail_matrix(env));
    record->base.terminated = out.killed;
  }
  return out;
}

bool bad_loss(double loss) { return !std::isfinite(loss) || std::abs(loss) > 1e9; }

char effective_mode(const TrainConfig& cfg, const ScenarioConfig& sc) {
  if (!cfg.scenario) return cfg.mode;
  return sc.mode_id.value_or('X');
}

}  // namespace

EvalResult evaluate_q(Env& env, const QLearner& learner, int episodes,
                      std::uint64_t seed_base) {
  EvalResult out;
  SeededRng rng(mix_seed(seed_base, 0xe7a1));
  for (int k = 0; k < episodes; ++k) {
    EpisodeOutcome o = run_q_episode(env, learner, mix_seed(seed_base, k),
                                     nullptr, 0, rng, nullptr);
    out.mean_return += o.episode_return;
    out.mean_damage += static_cast<double>(o.damage);
    out.kill_rate += o.killed ? 1.0 : 0.0;
    out.mean_steps += o.steps;
  }
  if (episodes > 0) {
    out.mean_return /= episodes;
    out.mean_damage /= episodes;
    out.kill_rate /= episodes;
    out.mean_steps /= episodes;
  }
  return out;
}

EvalResult evaluate_pg(Env& env, PgLearner& learner, int episodes,
                       std::uint64_t seed_base) {
  EvalResult out;
  SeededRng rng(mix_seed(seed_base, 0xe7a2));
  for (int k = 0; k < episodes; ++k) {
    EpisodeOutcome o = run_pg_episode(env, learner, mix_seed(seed_base, k),
                                      /*greedy=*/true, rng, nullptr);
    out.mean_return += o.episode_return;
    out.mean_damage += static_cast<double>(o.damage);
    out.kill_rate += o.killed ? 1.0 : 0.0;
    out.mean_steps += o.steps;
  }
  if (episodes > 0) {
    out.mean_return /= episodes;
    out.mean_damage /= episodes;
    out.kill_rate /= episodes;
    out.mean_steps /= episodes;
  }
  return out;
}

void write_curve_csv(const std::string& path, Method method, char mode,
                     std::uint64_t seed, const std::vector<CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw TensorError("cannot write " + path);
  out << "# dragonpit-curve v" << kCurveCsvVersion
      << " method=" << method_name(method) << " mode=" << mode
      << " seed=" << seed << "\n";
  out << "env_steps,episodes,train_return,eval_return,eval_damage,"
         "eval_kill_rate,loss,explore\n";
  out << std::setprecision(10);
  for (const auto& p : curve) {
    out << p.env_steps << ',' << p.episodes << ',' << p.train_return << ','
        << p.eval_return << ',' << p.eval_damage << ',' << p.eval_kill_rate
        << ',' << p.loss << ',' << p.explore << "\n";
  }
}

namespace {

void validate_train_config(const TrainConfig& cfg) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0)) throw TensorError(std::string("train config: ") + what +
                                    " must be positive");
  };
  positive(cfg.lr, "lr");
  positive(cfg.actor_lr, "actor_lr");
  positive(cfg.critic_lr, "critic_lr");
  positive(cfg.gamma, "gamma");
  positive(cfg.batch_size, "batch_size");
  positive(cfg.buffer_capacity, "buffer_capacity");
  positive(cfg.rollout_episodes, "rollout_episodes");
  positive(cfg.ppo_epochs, "ppo_epochs");
  positive(cfg.rnn_hidden, "rnn_hidden");
  positive(cfg.grad_norm_clip, "grad_norm_clip");
  if (cfg.eps_finish > cfg.eps_start)
    throw TensorError("train config: eps_finish must not exceed eps_start");
  if (!(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0))
    throw TensorError("train config: clip_eps must be in (0, 1)");
}

}  // namespace

void write_aggregate_csv(const std::string& path, Method method, char mode,
                         const std::vector<std::uint64_t>& seeds,
                         const std::vector<std::vector<CurvePoint>>& curves) {
  if (curves.empty()) throw TensorError("aggregate: no curves");
  std::size_t rows = curves.front().size();
  for (const auto& c : curves) rows = std::min(rows, c.size());
  std::ofstream out(path);
  if (!out) throw TensorError("cannot write " + path);
  out << "# dragonpit-aggregate v" << kAggregateCsvVersion
      << " method=" << method_name(method) << " mode=" << mode << " seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out << (i ? "," : "") << seeds[i];
  out << "\n";
  out << "row,env_steps_mean,episodes,eval_return_mean,eval_return_stderr,"
         "eval_damage_mean,eval_damage_stderr\n";
  out << std::setprecision(10);
  const double k = static_cast<double>(curves.size());
  auto stats = [&](auto get, std::size_t r, double& mean, double& stderr_) {
    mean = 0;
    for (const auto& c : curves) mean += get(c[r]);
    mean /= k;
    double ss = 0;
    for (const auto& c : curves) {
      double d = get(c[r]) - mean;
      ss += d * d;
    }
    stderr_ = k > 1 ? std::sqrt(ss / (k - 1)) / std::sqrt(k) : 0.0;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    double steps_mean = 0;
    for (const auto& c : curves)
      steps_mean += static_cast<double>(c[r].env_steps);
    steps_mean /= k;
    double ret_m, ret_se, dmg_m, dmg_se;
    stats([](const CurvePoint& p) { return p.eval_return; }, r, ret_m, ret_se);
    stats([](const CurvePoint& p) { return p.eval_damage; }, r, dmg_m, dmg_se);
    out << r << ',' << steps_mean << ',' << curves.front()[r].episodes << ','
        << ret_m << ',' << ret_se << ',' << dmg_m << ',' << dmg_se << "\n";
  }
}

TrainResult train_method(const TrainConfig& cfg) {
  validate_train_config(cfg);
  ScenarioConfig sc = cfg.scenario ? *cfg.scenario : builtin_mode(cfg.mode);
  Env env(sc);
  const char mode = effective_mode(cfg, sc);
  const std::string mname = method_name(cfg.method);

  TrainResult res;
  double window_return = 0;
  int window_count = 0;
  double last_loss = 0;
  double last_explore = 0;
  long long t_env = 0;
  int episode = 0;
  int next_report = cfg.report_interval_episodes;
  const std::uint64_t eval_seed = mix_seed(cfg.seed, 0xe7a1u);

  auto report = [&](double explore, const EvalResult& ev) {
    CurvePoint point;
    point.env_steps = t_env;
    point.episodes = episode;
    point.train_return = window_count > 0 ? window_return / window_count : 0;
    point.eval_return = ev.mean_return;
    point.eval_damage = ev.mean_damage;
    point.eval_kill_rate = ev.kill_rate;
    point.loss = last_loss;
    point.explore = explore;
    res.curve.push_back(point);
    res.best_eval_return = std::max(res.best_eval_return, ev.mean_return);
    window_return = 0;
    window_count = 0;
    if (cfg.verbose) {
      std::cout << mname << " mode " << mode << " steps " << t_env
                << " episodes " << episode << " train_ret "
                << point.train_return << " eval_ret " << ev.mean_return
                << " loss " << last_loss << "\n";
    }
  };

  if (is_value_method(cfg.method)) {
    QLearnerConfig qc;
    qc.mixer = mname;
    qc.n_agents = env.n_agents();
    qc.obs_dim = env.obs_dim();
    qc.state_dim = env.state_dim();
    qc.n_actions = env.n_actions();
    qc.rnn_hidden = cfg.rnn_hidden;
    qc.lr = cfg.lr;
    qc.gamma = cfg.gamma;
    qc.td_lambda = cfg.td_lambda;
    qc.grad_norm_clip = cfg.grad_norm_clip;
    qc.target_update_interval = cfg.target_update_interval;
    qc.seed = cfg.seed;
    QLearner learner(qc);

    EpisodeBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
    SeededRng act_rng(mix_seed(cfg.seed, 0xac7));
    SeededRng sample_rng(mix_seed(cfg.seed, 0x5a3));
    EpsSchedule eps{cfg.eps_start, cfg.eps_finish, cfg.eps_anneal};

    while (t_env < cfg.total_env_steps && !res.diverged &&
           (cfg.max_episodes == 0 || episode < cfg.max_episodes)) {
      EpisodeRecord rec;
      EpisodeOutcome o = run_q_episode(env, learner,
                                       mix_seed(cfg.seed, 1000 + episode), &eps,
                                       t_env, act_rng, &rec);
      buffer.add(std::move(rec));
      ++episode;
      t_env += o.steps;
      window_return += o.episode_return;
      ++window_count;
      res.episode_damage.push_back(static_cast<double>(o.damage));

      if (buffer.can_sample(static_cast<std::size_t>(cfg.batch_size)) &&
          episode % cfg.train_interval_episodes == 0) {
        TrainStats stats = learner.train(
            buffer.sample(static_cast<std::size_t>(cfg.batch_size), sample_rng));
        ++res.updates;
        last_loss = stats.loss;
        if (bad_loss(stats.loss)) res.diverged = true;
      }
      last_explore = eps.at(t_env);

      if (episode >= next_report) {
        report(last_explore,
               evaluate_q(env, learner, cfg.eval_episodes,
                          mix_seed(eval_seed, static_cast<std::uint64_t>(episode))));
        while (episode >= next_report) next_report += cfg.report_interval_episodes;
      }
    }

    EvalResult fin = evaluate_q(env, learner, cfg.eval_episodes,
                                mix_seed(eval_seed, 0xf17a1));
    res.final_eval_return = fin.mean_return;
    res.final_eval_damage = fin.mean_damage;
    res.final_eval_kill_rate = fin.kill_rate;
    res.best_eval_return = std::max(res.best_eval_return, fin.mean_return);
    if (res.curve.empty() || res.curve.back().env_steps != t_env)
      report(last_explore, fin);

    res.env_steps = t_env;
    res.episodes = episode;
    if (!cfg.out_dir.empty()) {
      std::filesystem::create_directories(cfg.out_dir);
      const std::string tag =
          mname + "_" + std::string(1, mode) + "_s" + std::to_string(cfg.seed);
      res.curve_path = cfg.out_dir + "/curve_" + tag + ".csv";
      write_curve_csv(res.curve_path, cfg.method, mode, cfg.seed, res.curve);
      res.checkpoint_path = cfg.out_dir + "/ckpt_" + tag + ".json";
      nlohmann::json meta;
      meta["method"] = mname;
      meta["mode"] = std::string(1, mode);
      meta["seed"] = cfg.seed;
      meta["env_steps"] = res.env_steps;
      meta["episodes"] = res.episodes;
      meta["final_eval_return"] = res.final_eval_return;
      meta["config_hash"] = config_hash_hex(sc);
      meta["n_agents"] = env.n_agents();
      meta["obs_dim"] = env.obs_dim();
      meta["state_dim"] = env.state_dim();
      meta["n_actions"] = env.n_actions();
      meta["rnn_hidden"] = cfg.rnn_hidden;
      save_checkpoint(res.checkpoint_path, mname, meta, learner.parameters());
    }
    return res;
  }

  // Policy-gradient methods.
  PgConfig pc;
  pc.happo = cfg.method == Method::happo;
  pc.n_agents = env.n_agents();
  pc.obs_dim = env.obs_dim();
  pc.state_dim = env.state_dim();
  pc.n_actions = env.n_actions();
  pc.hidden = cfg.mlp_hidden;
  pc.actor_lr = cfg.actor_lr;
  pc.critic_lr = cfg.critic_lr;
  pc.gamma = cfg.gamma;
  pc.gae_lambda = cfg.gae_lambda;
  pc.clip_eps = cfg.clip_eps;
  pc.ppo_epochs = cfg.ppo_epochs;
  pc.entropy_coef = cfg.entropy_coef;
  pc.huber_delta = cfg.huber_delta;
  pc.grad_norm_clip = cfg.grad_norm_clip;
  pc.use_value_norm = cfg.value_norm;
  pc.seed = cfg.seed;
  PgLearner learner(pc);

  SeededRng act_rng(mix_seed(cfg.seed, 0xac8));
  while (t_env < cfg.total_env_steps && !res.diverged &&
         (cfg.max_episodes == 0 || episode < cfg.max_episodes)) {
    std::vector<PgEpisode> batch;
    batch.reserve(static_cast<std::size_t>(cfg.rollout_episodes));
    for (int k = 0; k < cfg.rollout_episodes &&
                    (cfg.max_episodes == 0 || episode < cfg.max_episodes);
         ++k) {
      PgEpisode ep;
      EpisodeOutcome o =
          run_pg_episode(env, learner, mix_seed(cfg.seed, 1000 + episode),
                         /*greedy=*/false, act_rng, &ep);
      batch.push_back(std::move(ep));
      ++episode;
      t_env += o.steps;
      window_return += o.episode_return;
      ++window_count;
      res.episode_damage.push_back(static_cast<double>(o.damage));
    }
    if (batch.empty()) break;
    TrainStats stats = learner.update(batch);
    ++res.updates;
    last_loss = stats.loss;
    last_explore = stats.entropy;
    if (bad_loss(stats.loss)) res.diverged = true;

    if (episode >= next_report) {
      report(last_explore,
             evaluate_pg(env, learner, cfg.eval_episodes,
                         mix_seed(eval_seed, static_cast<std::uint64_t>(episode))));
      while (episode >= next_report) next_report += cfg.report_interval_episodes;
    }
  }

  EvalResult fin =
      evaluate_pg(env, learner, cfg.eval_episodes, mix_seed(eval_seed, 0xf17a1));
  res.final_eval_return = fin.mean_return;
  res.final_eval_damage = fin.mean_damage;
  res.final_eval_kill_rate = fin.kill_rate;
  res.best_eval_return = std::max(res.best_eval_return, fin.mean_return);
  if (res.curve.empty() || res.curve.back().env_steps != t_env)
    report(last_explore, fin);

  res.env_steps = t_env;
  res.episodes = episode;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string tag =
        mname + "_" + std::string(1, mode) + "_s" + std::to_string(cfg.seed);
    res.curve_path = cfg.out_dir + "/curve_" + tag + ".csv";
    write_curve_csv(res.curve_path, cfg.method, mode, cfg.seed, res.curve);
    res.checkpoint_path = cfg.out_dir + "/ckpt_" + tag + ".json";
    nlohmann::json meta;
    meta["method"] = mname;
    meta["mode"] = std::string(1, mode);
    meta["seed"] = cfg.seed;
    meta["env_steps"] = res.env_steps;
    meta["episodes"] = res.episodes;
    meta["final_eval_return"] = res.final_eval_return;
    meta["config_hash"] = config_hash_hex(sc);
    meta["n_agents"] = env.n_agents();
    meta["obs_dim"] = env.obs_dim();
    meta["state_dim"] = env.state_dim();
    meta["n_actions"] = env.n_actions();
    meta["mlp_hidden"] = cfg.mlp_hidden;
    save_checkpoint(res.checkpoint_path, mname, meta, learner.parameters());
  }
  return res;
}

CheckpointPolicy::CheckpointPolicy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, true);
  if (!doc.contains("kind") || !doc.contains("meta"))
    throw CheckpointError("checkpoint missing kind/meta: " + path);
  method_ = method_from_string(doc["kind"].get<std::string>());
  meta_ = doc["meta"];

  const int n_agents = meta_.at("n_agents").get<int>();
  const int obs_dim = meta_.at("obs_dim").get<int>();
  const int state_dim = meta_.at("state_dim").get<int>();
  const int n_actions = meta_.at("n_actions").get<int>();

  if (is_value_method(method_)) {
    QLearnerConfig qc;
    qc.mixer = method_name(method_);
    qc.n_agents = n_agents;
    qc.obs_dim = obs_dim;
    qc.state_dim = state_dim;
    qc.n_actions = n_actions;
    qc.rnn_hidden = meta_.at("rnn_hidden").get<int>();
    q_ = std::make_unique<QLearner>(qc);
    auto params = q_->parameters();
    checkpoint_from_json(doc, method_name(method_), params);
    act_state_ = q_->init_act_state();
  } else {
    PgConfig pc;
    pc.happo = method_ == Method::happo;
    pc.n_agents = n_agents;
    pc.obs_dim = obs_dim;
    pc.state_dim = state_dim;
    pc.n_actions = n_actions;
    pc.hidden = meta_.at("mlp_hidden").get<std::vector<int>>();
    pg_ = std::make_unique<PgLearner>(pc);
    auto params = pg_->parameters();
    checkpoint_from_json(doc, method_name(method_), params);
  }
}

void CheckpointPolicy::begin_episode() {
  if (q_) act_state_ = q_->init_act_state();
}

std::vector<int> CheckpointPolicy::act(const Env& env) {
  Matrix obs = env_obs_matrix(env);
  Matrix avail = env_avail_matrix(env);
  if (q_) return q_->act(obs, avail, act_state_, 0.0, rng_);
  return pg_->act(obs, avail, rng_, nullptr, /*greedy=*/true);
}

}  // namespace dragonpit::rl
