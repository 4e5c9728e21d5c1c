#include "dragonpit/rl/mixers.hpp"

#include <cmath>

namespace dragonpit::rl {
namespace {

double elu_raw(double x) { return x > 0 ? x : std::exp(x) - 1.0; }

Matrix sigmoid_raw(const Matrix& m) {
  return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

}  // namespace

double dueling_q(double v, const Eigen::RowVectorXd& adv, int action) {
  return v + adv(action) - adv.mean();
}

Tensor VdnMixer::mix(Graph&, const MixIn& in) { return row_sum(in.chosen_qs); }

Matrix VdnMixer::mix_raw(const MixInRaw& in) const {
  return in.chosen_qs.rowwise().sum();
}

QmixMixer::QmixMixer(int state_dim, int n_agents, SeededRng& rng)
    : n_agents_(n_agents),
      hyper_w1_("qmix.hw1", state_dim, {kHypernetHidden},
                n_agents * kMixEmbedDim, Act::relu, rng),
      hyper_b1_("qmix.hb1", state_dim, kMixEmbedDim, rng),
      hyper_w2_("qmix.hw2", state_dim, {kHypernetHidden}, kMixEmbedDim,
                Act::relu, rng),
      value_("qmix.v", state_dim, {kMixEmbedDim}, 1, Act::relu, rng) {}

Tensor QmixMixer::mix(Graph& g, const MixIn& in) {
  const int n = n_agents_;
  Tensor w1 = abs_(hyper_w1_.forward(g, in.state));      // [B, n*E]
  Tensor w1_rows = ungroup_rows(w1, n);                  // [B*n, E]
  Tensor q_col = ungroup_rows(in.chosen_qs, n);          // [B*n, 1]
  Tensor weighted = mul(broadcast_col(q_col, kMixEmbedDim), w1_rows);
  Tensor hidden = elu(add(sum_row_groups(weighted, n),
                          hyper_b1_.forward(g, in.state)));
  Tensor w2 = abs_(hyper_w2_.forward(g, in.state));      // [B, E]
  Tensor y = row_sum(mul(hidden, w2));
  return add(y, value_.forward(g, in.state));
}

Matrix QmixMixer::mix_raw(const MixInRaw& in) const {
  const int n = n_agents_;
  const int e_dim = kMixEmbedDim;
  Matrix w1 = hyper_w1_.forward(in.state).cwiseAbs();
  Matrix b1 = hyper_b1_.forward(in.state);
  Matrix w2 = hyper_w2_.forward(in.state).cwiseAbs();
  Matrix v = value_.forward(in.state);
  Matrix out(in.chosen_qs.rows(), 1);
  for (Eigen::Index b = 0; b < out.rows(); ++b) {
    double y = 0;
    for (int e = 0; e < e_dim; ++e) {
      double h = b1(b, e);
      for (int a = 0; a < n; ++a) h += in.chosen_qs(b, a) * w1(b, a * e_dim + e);
      y += elu_raw(h) * w2(b, e);
    }
    out(b, 0) = y + v(b, 0);
  }
  return out;
}

void QmixMixer::collect(std::vector<Parameter*>& out) {
  hyper_w1_.collect(out);
  hyper_b1_.collect(out);
  hyper_w2_.collect(out);
  value_.collect(out);
}

QplexMixer::QplexMixer(int state_dim, int n_agents, SeededRng& rng)
    : n_agents_(n_agents),
      value_("qplex.v", state_dim, {kHypernetHidden}, 1, Act::relu, rng) {
  for (int k = 0; k < kAdvKernels; ++k) {
    std::string base = "qplex.k" + std::to_string(k);
    keys_.emplace_back(base + ".key", state_dim, std::vector<int>{kHypernetHidden},
                       1, Act::relu, rng);
    agents_.emplace_back(base + ".agents", state_dim,
                         std::vector<int>{kHypernetHidden}, n_agents, Act::relu,
                         rng);
  }
}

Tensor QplexMixer::mix(Graph& g, const MixIn& in) {
  Tensor lambda_sum{};
  for (int k = 0; k < kAdvKernels; ++k) {
    Tensor key = abs_(keys_[k].forward(g, in.state));            // [B,1]
    Tensor agents = sigmoid(agents_[k].forward(g, in.state));    // [B,n]
    Tensor term = mul(broadcast_col(key, n_agents_), agents);
    lambda_sum = k == 0 ? term : add(lambda_sum, term);
  }
  Tensor adv = sub(in.chosen_qs, in.mean_qs);
  Tensor adv_tot = row_sum(mul(lambda_sum, adv));
  return add(value_.forward(g, in.state), adv_tot);
}

Matrix QplexMixer::mix_raw(const MixInRaw& in) const {
  Matrix lambda = advantage_weights(in.state);
  Matrix adv = in.chosen_qs - in.mean_qs;
  Matrix out = value_.forward(in.state);
  out += lambda.cwiseProduct(adv).rowwise().sum();
  return out;
}

Matrix QplexMixer::advantage_weights(const Matrix& state) const {
  Matrix lambda = Matrix::Zero(state.rows(), n_agents_);
  for (int k = 0; k < kAdvKernels; ++k) {
    Matrix key = keys_[k].forward(state).cwiseAbs();
    Matrix agents = sigmoid_raw(agents_[k].forward(state));
    lambda += (key * Matrix::Ones(1, n_agents_)).cwiseProduct(agents);
  }
  return lambda;
}

Matrix QplexMixer::state_value(const Matrix& state) const {
  return value_.forward(state);
}

void QplexMixer::collect(std::vector<Parameter*>& out) {
  value_.collect(out);
  for (int k = 0; k < kAdvKernels; ++k) {
    keys_[k].collect(out);
    agents_[k].collect(out);
  }
}

QattenMixer::QattenMixer(int state_dim, int n_agents, SeededRng& rng)
    : n_agents_(n_agents), feat_dim_(state_dim / n_agents) {
  if (state_dim % n_agents != 0)
    throw TensorError("qatten: state must split evenly across agents");
  for (int h = 0; h < kAttentionHeads; ++h) {
    std::string base = "qatten.h" + std::to_string(h);
    queries_.emplace_back(base + ".q", state_dim, std::vector<int>{kHypernetHidden},
                          kAttendDim, Act::relu, rng);
    keys_.emplace_back(base + ".k", feat_dim_, kAttendDim, rng);
  }
  head_weight_ = Linear("qatten.w", state_dim, kAttentionHeads, rng);
}

Tensor QattenMixer::mix(Graph& g, const MixIn& in) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(kAttendDim));
  Tensor head_w = abs_(head_weight_.forward(g, in.state));  // [B, H]
  Tensor total{};
  for (int h = 0; h < kAttentionHeads; ++h) {
    Tensor q = queries_[h].forward(g, in.state);  // [B, d]
    Tensor scores{};
    for (int a = 0; a < n_agents_; ++a) {
      Tensor feat = slice_cols(in.state, a * feat_dim_, feat_dim_);
      Tensor key = keys_[h].forward(g, feat);     // [B, d]
      Tensor e = row_sum(mul(q, key));            // [B, 1]
      scores = a == 0 ? e : concat_cols(scores, e);
    }
    Tensor alpha = softmax_rows(scale(scores, inv_sqrt_d, 0.0));  // [B, n]
    Tensor head_q = row_sum(mul(alpha, in.chosen_qs));            // [B, 1]
    Tensor w_h = slice_cols(head_w, h, 1);
    Tensor term = mul(w_h, head_q);
    total = h == 0 ? term : add(total, term);
  }
  return total;
}

Matrix QattenMixer::head_scores(int head, const Matrix& state) const {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(kAttendDim));
  Matrix q = queries_[head].forward(state);
  Matrix scores(state.rows(), n_agents_);
  for (int a = 0; a < n_agents_; ++a) {
    Matrix key = keys_[head].forward(state.middleCols(a * feat_dim_, feat_dim_));
    scores.col(a) = q.cwiseProduct(key).rowwise().sum();
  }
  return scores * inv_sqrt_d;
}

std::vector<Matrix> QattenMixer::attention_rows(const Matrix& state) const {
  std::vector<Matrix> heads;
  for (int h = 0; h < kAttentionHeads; ++h) {
    Matrix scores = head_scores(h, state);
    Eigen::VectorXd mx = scores.rowwise().maxCoeff();
    Matrix ex = (scores.array().colwise() - mx.array()).exp().matrix();
    Eigen::VectorXd denom = ex.rowwise().sum();
    heads.push_back((ex.array().colwise() / denom.array()).matrix());
  }
  return heads;
}

Matrix QattenMixer::head_weights(const Matrix& state) const {
  return head_weight_.forward(state).cwiseAbs();
}

Matrix QattenMixer::mix_raw(const MixInRaw& in) const {
  Matrix head_w = head_weights(in.state);
  std::vector<Matrix> alphas = attention_rows(in.state);
  Matrix out = Matrix::Zero(in.chosen_qs.rows(), 1);
  for (int h = 0; h < kAttentionHeads; ++h) {
    Matrix head_q = alphas[h].cwiseProduct(in.chosen_qs).rowwise().sum();
    out += head_w.col(h).cwiseProduct(head_q);
  }
  return out;
}

void QattenMixer::collect(std::vector<Parameter*>& out) {
  for (int h = 0; h < kAttentionHeads; ++h) {
    queries_[h].collect(out);
    keys_[h].collect(out);
  }
  head_weight_.collect(out);
}

std::unique_ptr<Mixer> make_mixer(const std::string& kind, int state_dim,
                                  int n_agents, SeededRng& rng) {
  if (kind == "vdn") return std::make_unique<VdnMixer>();
  if (kind == "qmix") return std::make_unique<QmixMixer>(state_dim, n_agents, rng);
  if (kind == "qplex") return std::make_unique<QplexMixer>(state_dim, n_agents, rng);
  if (kind == "qatten") return std::make_unique<QattenMixer>(state_dim, n_agents, rng);
  throw TensorError("unknown mixer kind: " + kind);
}

}  // namespace dragonpit::rl
