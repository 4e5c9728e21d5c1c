#include "dragonpit/rl/tensor.hpp"

#include <cmath>

namespace dragonpit::rl {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw TensorError(msg);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
              std::to_string(b.cols()));
}

}  // namespace

const Matrix& Tensor::value() const {
  require(g != nullptr && node >= 0, "tensor handle is empty");
  return g->nodes_[static_cast<std::size_t>(node)].value;
}

const Matrix& Tensor::grad() const {
  require(g != nullptr && node >= 0, "tensor handle is empty");
  auto& n = g->nodes_[static_cast<std::size_t>(node)];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor emit(Graph& g, Op op, Matrix value, int a, int b, double alpha,
            double beta, int i0, std::vector<int> index) {
  Graph::Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.value = std::move(value);
  node.alpha = alpha;
  node.beta = beta;
  node.i0 = i0;
  node.index = std::move(index);
  bool grad = false;
  if (op != Op::stop_gradient) {
    if (a >= 0) grad = grad || g.nodes_[static_cast<std::size_t>(a)].needs_grad;
    if (b >= 0) grad = grad || g.nodes_[static_cast<std::size_t>(b)].needs_grad;
  }
  node.needs_grad = grad;
  g.nodes_.push_back(std::move(node));
  return Tensor{&g, static_cast<int>(g.nodes_.size()) - 1};
}

Tensor Graph::constant(Matrix v) {
  Node node;
  node.op = Op::leaf;
  node.value = std::move(v);
  nodes_.push_back(std::move(node));
  return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Graph::param(Parameter& p) {
  auto it = param_leaves_.find(&p);
  if (it != param_leaves_.end()) return Tensor{this, it->second};
  Node node;
  node.op = Op::leaf;
  node.value = p.value;
  node.needs_grad = true;
  node.owner = &p;
  nodes_.push_back(std::move(node));
  int idx = static_cast<int>(nodes_.size()) - 1;
  param_leaves_.emplace(&p, idx);
  return Tensor{this, idx};
}

void Graph::accumulate(int node, const Matrix& g) {
  if (node < 0) return;
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Graph::backward(Tensor root) {
  require(root.g == this, "backward: tensor from a different graph");
  const Node& r = nodes_[static_cast<std::size_t>(root.node)];
  require(r.value.rows() == 1 && r.value.cols() == 1,
          "backward: root must be a scalar");
  if (!r.needs_grad) return;
  nodes_[static_cast<std::size_t>(root.node)].grad = Matrix::Ones(1, 1);
  for (int i = root.node; i >= 0; --i) backprop_node(i);
  for (auto& [param, leaf] : param_leaves_) {
    Node& n = nodes_[static_cast<std::size_t>(leaf)];
    if (n.grad.size() != 0) n.owner->grad += n.grad;
  }
}

void Graph::backprop_node(int i) {
  Node& n = nodes_[static_cast<std::size_t>(i)];
  if (!n.needs_grad || n.grad.size() == 0) return;
  const Matrix& G = n.grad;
  auto val = [&](int idx) -> const Matrix& {
    return nodes_[static_cast<std::size_t>(idx)].value;
  };

  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul:
      accumulate(n.a, G * val(n.b).transpose());
      accumulate(n.b, val(n.a).transpose() * G);
      break;
    case Op::add:
      accumulate(n.a, G);
      accumulate(n.b, G);
      break;
    case Op::add_rowvec:
      accumulate(n.a, G);
      accumulate(n.b, G.colwise().sum());
      break;
    case Op::sub:
      accumulate(n.a, G);
      accumulate(n.b, -G);
      break;
    case Op::mul:
      accumulate(n.a, G.cwiseProduct(val(n.b)));
      accumulate(n.b, G.cwiseProduct(val(n.a)));
      break;
    case Op::min_elem: {
      Matrix take_a =
          (val(n.a).array() <= val(n.b).array()).cast<double>().matrix();
      accumulate(n.a, G.cwiseProduct(take_a));
      accumulate(n.b, G.cwiseProduct((1.0 - take_a.array()).matrix()));
      break;
    }
    case Op::scale:
      accumulate(n.a, n.alpha * G);
      break;
    case Op::transpose:
      accumulate(n.a, G.transpose());
      break;
    case Op::relu: {
      Matrix mask = (val(n.a).array() > 0).cast<double>().matrix();
      accumulate(n.a, G.cwiseProduct(mask));
      break;
    }
    case Op::elu: {
      // y = x for x > 0, exp(x) - 1 otherwise, so dy/dx = 1 or y + 1.
      Matrix d = (val(n.a).array() > 0)
                     .select(Matrix::Ones(G.rows(), G.cols()).array(),
                             n.value.array() + 1.0)
                     .matrix();
      accumulate(n.a, G.cwiseProduct(d));
      break;
    }
    case Op::tanh_:
      accumulate(n.a,
                 (G.array() * (1.0 - n.value.array().square())).matrix());
      break;
    case Op::sigmoid:
      accumulate(
          n.a,
          (G.array() * n.value.array() * (1.0 - n.value.array())).matrix());
      break;
    case Op::abs_: {
      Matrix sign = val(n.a).array().sign().matrix();
      accumulate(n.a, G.cwiseProduct(sign));
      break;
    }
    case Op::exp_:
      accumulate(n.a, G.cwiseProduct(n.value));
      break;
    case Op::log_:
      accumulate(n.a, (G.array() / val(n.a).array()).matrix());
      break;
    case Op::clamp_: {
      Matrix open = ((val(n.a).array() > n.alpha) && (val(n.a).array() < n.beta))
                        .cast<double>()
                        .matrix();
      accumulate(n.a, G.cwiseProduct(open));
      break;
    }
    case Op::softmax_rows: {
      Eigen::VectorXd dot = G.cwiseProduct(n.value).rowwise().sum();
      Matrix shifted = G.array().colwise() - dot.array();
      accumulate(n.a, shifted.cwiseProduct(n.value));
      break;
    }
    case Op::log_softmax_rows: {
      Matrix p = n.value.array().exp().matrix();
      Eigen::VectorXd s = G.rowwise().sum();
      Matrix dx = G - (p.array().colwise() * s.array()).matrix();
      accumulate(n.a, dx);
      break;
    }
    case Op::row_sum:
      accumulate(n.a, G * Matrix::Ones(1, val(n.a).cols()));
      break;
    case Op::col_sum:
      accumulate(n.a, Matrix::Ones(val(n.a).rows(), 1) * G);
      break;
    case Op::sum_all:
      accumulate(n.a,
                 Matrix::Constant(val(n.a).rows(), val(n.a).cols(), G(0, 0)));
      break;
    case Op::mean_all:
      accumulate(n.a, Matrix::Constant(
                          val(n.a).rows(), val(n.a).cols(),
                          G(0, 0) / static_cast<double>(val(n.a).size())));
      break;
    case Op::gather_cols: {
      Matrix d = Matrix::Zero(val(n.a).rows(), val(n.a).cols());
      for (Eigen::Index r = 0; r < d.rows(); ++r)
        d(r, n.index[static_cast<std::size_t>(r)]) = G(r, 0);
      accumulate(n.a, d);
      break;
    }
    case Op::concat_cols:
      accumulate(n.a, G.leftCols(val(n.a).cols()));
      accumulate(n.b, G.rightCols(val(n.b).cols()));
      break;
    case Op::concat_rows:
      accumulate(n.a, G.topRows(val(n.a).rows()));
      accumulate(n.b, G.bottomRows(val(n.b).rows()));
      break;
    case Op::slice_cols: {
      Matrix d = Matrix::Zero(val(n.a).rows(), val(n.a).cols());
      d.middleCols(n.i0, G.cols()) = G;
      accumulate(n.a, d);
      break;
    }
    case Op::group_rows: {
      const int k = n.i0;
      const Eigen::Index c = val(n.a).cols();
      Matrix d(val(n.a).rows(), c);
      for (Eigen::Index gr = 0; gr < G.rows(); ++gr)
        for (int j = 0; j < k; ++j) d.row(gr * k + j) = G.block(gr, j * c, 1, c);
      accumulate(n.a, d);
      break;
    }
    case Op::ungroup_rows: {
      const int k = n.i0;
      const Eigen::Index c = n.value.cols();
      Matrix d(val(n.a).rows(), val(n.a).cols());
      for (Eigen::Index gr = 0; gr < d.rows(); ++gr)
        for (int j = 0; j < k; ++j) d.block(gr, j * c, 1, c) = G.row(gr * k + j);
      accumulate(n.a, d);
      break;
    }
    case Op::repeat_rows: {
      const int k = n.i0;
      Matrix d = Matrix::Zero(val(n.a).rows(), val(n.a).cols());
      for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (int j = 0; j < k; ++j) d.row(r) += G.row(r * k + j);
      accumulate(n.a, d);
      break;
    }
    case Op::sum_row_groups: {
      const int k = n.i0;
      Matrix d(val(n.a).rows(), val(n.a).cols());
      for (Eigen::Index gr = 0; gr < G.rows(); ++gr)
        for (int j = 0; j < k; ++j) d.row(gr * k + j) = G.row(gr);
      accumulate(n.a, d);
      break;
    }
    case Op::broadcast_col:
      accumulate(n.a, G.rowwise().sum());
      break;
    case Op::huber: {
      Matrix e = val(n.a) - val(n.b);
      Matrix d = e.array().min(n.alpha).max(-n.alpha).matrix().cwiseProduct(G);
      accumulate(n.a, d);
      accumulate(n.b, -d);
      break;
    }
    case Op::stop_gradient:
      break;
  }
}

// --- op builders -----------------------------------------------------------

namespace {

Graph& graph_of(Tensor t) {
  require(t.g != nullptr, "op on empty tensor");
  return *t.g;
}

void require_same_graph(Tensor a, Tensor b) {
  require(a.g == b.g, "op mixes tensors from different graphs");
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  return emit(graph_of(a), Op::matmul, a.value() * b.value(), a.node, b.node, 0,
              0, 0, {});
}

Tensor add(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  return emit(graph_of(a), Op::add, a.value() + b.value(), a.node, b.node, 0, 0,
              0, {});
}

Tensor add_rowvec(Tensor a, Tensor bias) {
  require_same_graph(a, bias);
  require(bias.rows() == 1 && bias.cols() == a.cols(),
          "add_rowvec: bias must be [1, cols]");
  Matrix out = a.value().rowwise() + Eigen::RowVectorXd(bias.value().row(0));
  return emit(graph_of(a), Op::add_rowvec, std::move(out), a.node, bias.node, 0,
              0, 0, {});
}

Tensor sub(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  return emit(graph_of(a), Op::sub, a.value() - b.value(), a.node, b.node, 0, 0,
              0, {});
}

Tensor mul(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  return emit(graph_of(a), Op::mul, a.value().cwiseProduct(b.value()), a.node,
              b.node, 0, 0, 0, {});
}

Tensor min_elem(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require_same_shape(a.value(), b.value(), "min_elem");
  return emit(graph_of(a), Op::min_elem, a.value().cwiseMin(b.value()), a.node,
              b.node, 0, 0, 0, {});
}

Tensor scale(Tensor a, double alpha, double beta) {
  Matrix out = (alpha * a.value().array() + beta).matrix();
  return emit(graph_of(a), Op::scale, std::move(out), a.node, -1, alpha, beta,
              0, {});
}

Tensor transpose(Tensor a) {
  return emit(graph_of(a), Op::transpose, a.value().transpose(), a.node, -1, 0,
              0, 0, {});
}

Tensor relu(Tensor a) {
  return emit(graph_of(a), Op::relu, a.value().cwiseMax(0.0), a.node, -1, 0, 0,
              0, {});
}

Tensor elu(Tensor a) {
  Matrix out = (a.value().array() > 0)
                   .select(a.value().array(), a.value().array().exp() - 1.0)
                   .matrix();
  return emit(graph_of(a), Op::elu, std::move(out), a.node, -1, 0, 0, 0, {});
}

Tensor tanh_(Tensor a) {
  return emit(graph_of(a), Op::tanh_, a.value().array().tanh().matrix(), a.node,
              -1, 0, 0, 0, {});
}

Tensor sigmoid(Tensor a) {
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return emit(graph_of(a), Op::sigmoid, std::move(out), a.node, -1, 0, 0, 0,
              {});
}

Tensor abs_(Tensor a) {
  return emit(graph_of(a), Op::abs_, a.value().cwiseAbs(), a.node, -1, 0, 0, 0,
              {});
}

Tensor exp_(Tensor a) {
  return emit(graph_of(a), Op::exp_, a.value().array().exp().matrix(), a.node,
              -1, 0, 0, 0, {});
}

Tensor log_(Tensor a) {
  return emit(graph_of(a), Op::log_, a.value().array().log().matrix(), a.node,
              -1, 0, 0, 0, {});
}

Tensor clamp_(Tensor a, double lo, double hi) {
  require(lo <= hi, "clamp: lo > hi");
  Matrix out = a.value().array().max(lo).min(hi).matrix();
  return emit(graph_of(a), Op::clamp_, std::move(out), a.node, -1, lo, hi, 0,
              {});
}

Tensor softmax_rows(Tensor a) {
  Eigen::VectorXd mx = a.value().rowwise().maxCoeff();
  Matrix z = (a.value().array().colwise() - mx.array()).exp().matrix();
  Eigen::VectorXd s = z.rowwise().sum();
  Matrix out = (z.array().colwise() / s.array()).matrix();
  return emit(graph_of(a), Op::softmax_rows, std::move(out), a.node, -1, 0, 0,
              0, {});
}

Tensor log_softmax_rows(Tensor a) {
  Eigen::VectorXd mx = a.value().rowwise().maxCoeff();
  Matrix z = (a.value().array().colwise() - mx.array()).matrix();
  Eigen::VectorXd lse = z.array().exp().rowwise().sum().log();
  Matrix out = (z.array().colwise() - lse.array()).matrix();
  return emit(graph_of(a), Op::log_softmax_rows, std::move(out), a.node, -1, 0,
              0, 0, {});
}

Tensor row_sum(Tensor a) {
  Matrix out = a.value().rowwise().sum();
  return emit(graph_of(a), Op::row_sum, std::move(out), a.node, -1, 0, 0, 0,
              {});
}

Tensor col_sum(Tensor a) {
  Matrix out = a.value().colwise().sum();
  return emit(graph_of(a), Op::col_sum, std::move(out), a.node, -1, 0, 0, 0,
              {});
}

Tensor sum_all(Tensor a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return emit(graph_of(a), Op::sum_all, std::move(out), a.node, -1, 0, 0, 0,
              {});
}

Tensor mean_all(Tensor a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().mean();
  return emit(graph_of(a), Op::mean_all, std::move(out), a.node, -1, 0, 0, 0,
              {});
}

Tensor gather_cols(Tensor a, const std::vector<int>& cols) {
  require(static_cast<Eigen::Index>(cols.size()) == a.rows(),
          "gather_cols: one index per row required");
  Matrix out(a.rows(), 1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    int c = cols[static_cast<std::size_t>(r)];
    require(c >= 0 && c < a.cols(), "gather_cols: index out of range");
    out(r, 0) = a.value()(r, c);
  }
  return emit(graph_of(a), Op::gather_cols, std::move(out), a.node, -1, 0, 0, 0,
              cols);
}

Tensor concat_cols(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require(a.rows() == b.rows(), "concat_cols: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  return emit(graph_of(a), Op::concat_cols, std::move(out), a.node, b.node, 0,
              0, 0, {});
}

Tensor concat_rows(Tensor a, Tensor b) {
  require_same_graph(a, b);
  require(a.cols() == b.cols(), "concat_rows: column counts differ");
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a.value(), b.value();
  return emit(graph_of(a), Op::concat_rows, std::move(out), a.node, b.node, 0,
              0, 0, {});
}

Tensor slice_cols(Tensor a, int first, int count) {
  require(first >= 0 && count >= 0 && first + count <= a.cols(),
          "slice_cols: range out of bounds");
  Matrix out = a.value().middleCols(first, count);
  return emit(graph_of(a), Op::slice_cols, std::move(out), a.node, -1, 0, 0,
              first, {});
}

Tensor group_rows(Tensor a, int k) {
  require(k > 0 && a.rows() % k == 0, "group_rows: rows not divisible by k");
  const Eigen::Index groups = a.rows() / k;
  const Eigen::Index c = a.cols();
  Matrix out(groups, k * c);
  for (Eigen::Index gr = 0; gr < groups; ++gr)
    for (int j = 0; j < k; ++j)
      out.block(gr, j * c, 1, c) = a.value().row(gr * k + j);
  return emit(graph_of(a), Op::group_rows, std::move(out), a.node, -1, 0, 0, k,
              {});
}

Tensor ungroup_rows(Tensor a, int k) {
  require(k > 0 && a.cols() % k == 0, "ungroup_rows: cols not divisible by k");
  const Eigen::Index c = a.cols() / k;
  Matrix out(a.rows() * k, c);
  for (Eigen::Index gr = 0; gr < a.rows(); ++gr)
    for (int j = 0; j < k; ++j)
      out.row(gr * k + j) = a.value().block(gr, j * c, 1, c);
  return emit(graph_of(a), Op::ungroup_rows, std::move(out), a.node, -1, 0, 0,
              k, {});
}

Tensor repeat_rows(Tensor a, int k) {
  require(k > 0, "repeat_rows: k must be positive");
  Matrix out(a.rows() * k, a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (int j = 0; j < k; ++j) out.row(r * k + j) = a.value().row(r);
  return emit(graph_of(a), Op::repeat_rows, std::move(out), a.node, -1, 0, 0, k,
              {});
}

Tensor sum_row_groups(Tensor a, int k) {
  require(k > 0 && a.rows() % k == 0,
          "sum_row_groups: rows not divisible by k");
  const Eigen::Index groups = a.rows() / k;
  Matrix out = Matrix::Zero(groups, a.cols());
  for (Eigen::Index gr = 0; gr < groups; ++gr)
    for (int j = 0; j < k; ++j) out.row(gr) += a.value().row(gr * k + j);
  return emit(graph_of(a), Op::sum_row_groups, std::move(out), a.node, -1, 0, 0,
              k, {});
}

Tensor broadcast_col(Tensor a, int k) {
  require(a.cols() == 1, "broadcast_col: input must be a column");
  require(k > 0, "broadcast_col: k must be positive");
  Matrix out = a.value() * Matrix::Ones(1, k);
  return emit(graph_of(a), Op::broadcast_col, std::move(out), a.node, -1, 0, 0,
              k, {});
}

Tensor huber(Tensor pred, Tensor target, double delta) {
  require_same_graph(pred, target);
  require_same_shape(pred.value(), target.value(), "huber");
  require(delta > 0, "huber: delta must be positive");
  Matrix e = pred.value() - target.value();
  Matrix out =
      (e.array().abs() <= delta)
          .select(0.5 * e.array().square(),
                  delta * (e.array().abs() - 0.5 * delta))
          .matrix();
  return emit(graph_of(pred), Op::huber, std::move(out), pred.node, target.node,
              delta, 0, 0, {});
}

Tensor stop_gradient(Tensor a) {
  return emit(graph_of(a), Op::stop_gradient, a.value(), a.node, -1, 0, 0, 0,
              {});
}

// --- optimizer -------------------------------------------------------------

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm && norm > 0) {
    double s = max_norm / norm;
    for (auto* p : params) p->grad *= s;
  }
  return norm;
}

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1,
           double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->grad.setZero();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    Matrix mhat = m_[i] / bc1;
    Matrix vhat = v_[i] / bc2;
    p.value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

}  // namespace dragonpit::rl
