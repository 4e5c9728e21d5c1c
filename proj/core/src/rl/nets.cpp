#include "dragonpit/rl/nets.hpp"

#include <Eigen/QR>
#include <cmath>

namespace dragonpit::rl {

double normal_sample(SeededRng& rng) {
  // Box-Muller; u1 nudged away from zero so the log stays finite.
  double u1 = rng.uniform01();
  double u2 = rng.uniform01();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                      SeededRng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = (rng.uniform01() * 2.0 - 1.0) * bound;
  return m;
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, SeededRng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal_sample(rng);
  return m;
}

Matrix orthogonal_matrix(Eigen::Index rows, Eigen::Index cols, double gain,
                         SeededRng& rng) {
  const bool tall = rows >= cols;
  Matrix a = tall ? normal_matrix(rows, cols, rng) : normal_matrix(cols, rows, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  Matrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  Matrix out = tall ? q : Matrix(q.transpose());
  return gain * out;
}

void copy_values(const std::vector<Parameter*>& src,
                 const std::vector<Parameter*>& dst) {
  if (src.size() != dst.size())
    throw TensorError("copy_values: parameter lists differ in length");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]->value.rows() != dst[i]->value.rows() ||
        src[i]->value.cols() != dst[i]->value.cols())
      throw TensorError("copy_values: shape mismatch at " + src[i]->name);
    dst[i]->value = src[i]->value;
  }
}

Linear::Linear(const std::string& name, int in, int out, SeededRng& rng,
               Init init, double gain) {
  if (init == Init::orthogonal) {
    w = Parameter(name + ".w", orthogonal_matrix(in, out, gain, rng));
    b = Parameter(name + ".b", Matrix::Zero(1, out));
  } else {
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w = Parameter(name + ".w", uniform_matrix(in, out, bound, rng));
    b = Parameter(name + ".b", uniform_matrix(1, out, bound, rng));
  }
}

Tensor Linear::forward(Graph& g, Tensor x) {
  return add_rowvec(matmul(x, g.param(w)), g.param(b));
}

Matrix Linear::forward(const Matrix& x) const {
  return (x * w.value).rowwise() + Eigen::RowVectorXd(b.value.row(0));
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

GruCell::GruCell(const std::string& name, int in, int hidden_dim,
                 SeededRng& rng)
    : hidden(hidden_dim) {
  double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto weight = [&](const char* suffix, int rows) {
    return Parameter(name + "." + suffix,
                     uniform_matrix(rows, hidden_dim, bound, rng));
  };
  auto bias = [&](const char* suffix) {
    return Parameter(name + "." + suffix, uniform_matrix(1, hidden_dim, bound, rng));
  };
  wxr = weight("wxr", in);
  wxz = weight("wxz", in);
  wxn = weight("wxn", in);
  whr = weight("whr", hidden_dim);
  whz = weight("whz", hidden_dim);
  whn = weight("whn", hidden_dim);
  bxr = bias("bxr");
  bxz = bias("bxz");
  bxn = bias("bxn");
  bhr = bias("bhr");
  bhz = bias("bhz");
  bhn = bias("bhn");
}

Tensor GruCell::step(Graph& g, Tensor x, Tensor h) {
  Tensor r = sigmoid(add(add_rowvec(matmul(x, g.param(wxr)), g.param(bxr)),
                         add_rowvec(matmul(h, g.param(whr)), g.param(bhr))));
  Tensor z = sigmoid(add(add_rowvec(matmul(x, g.param(wxz)), g.param(bxz)),
                         add_rowvec(matmul(h, g.param(whz)), g.param(bhz))));
  Tensor n = tanh_(add(add_rowvec(matmul(x, g.param(wxn)), g.param(bxn)),
                       mul(r, add_rowvec(matmul(h, g.param(whn)), g.param(bhn)))));
  Tensor one_minus_z = scale(z, -1.0, 1.0);
  return add(mul(one_minus_z, n), mul(z, h));
}

Matrix GruCell::step(const Matrix& x, const Matrix& h) const {
  auto lin = [](const Matrix& m, const Parameter& w, const Parameter& b) {
    return Matrix((m * w.value).rowwise() + Eigen::RowVectorXd(b.value.row(0)));
  };
  auto sig = [](const Matrix& m) {
    return Matrix((1.0 / (1.0 + (-m.array()).exp())).matrix());
  };
  Matrix r = sig(lin(x, wxr, bxr) + lin(h, whr, bhr));
  Matrix z = sig(lin(x, wxz, bxz) + lin(h, whz, bhz));
  Matrix n =
      (lin(x, wxn, bxn) + r.cwiseProduct(lin(h, whn, bhn))).array().tanh();
  return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
}

void GruCell::collect(std::vector<Parameter*>& out) {
  for (Parameter* p : {&wxr, &wxz, &wxn, &whr, &whz, &whn, &bxr, &bxz, &bxn,
                       &bhr, &bhz, &bhn})
    out.push_back(p);
}

AgentNet::AgentNet(const std::string& name, int in, int hidden_dim, int out,
                   SeededRng& rng)
    : input(in),
      hidden(hidden_dim),
      output(out),
      fc1(name + ".fc1", in, hidden_dim, rng),
      gru(name + ".gru", hidden_dim, hidden_dim, rng),
      fc2(name + ".fc2", hidden_dim, out, rng) {}

std::pair<Tensor, Tensor> AgentNet::forward(Graph& g, Tensor x, Tensor h) {
  Tensor a = relu(fc1.forward(g, x));
  Tensor h_next = gru.step(g, a, h);
  return {fc2.forward(g, h_next), h_next};
}

std::pair<Matrix, Matrix> AgentNet::forward(const Matrix& x,
                                            const Matrix& h) const {
  Matrix a = fc1.forward(x).cwiseMax(0.0);
  Matrix h_next = gru.step(a, h);
  return {fc2.forward(h_next), h_next};
}

void AgentNet::collect(std::vector<Parameter*>& out) {
  fc1.collect(out);
  gru.collect(out);
  fc2.collect(out);
}

Mlp::Mlp(const std::string& name, int in, const std::vector<int>& hidden_dims,
         int out, Act activation, SeededRng& rng, Init init, double head_gain)
    : act(activation) {
  int prev = in;
  for (std::size_t i = 0; i < hidden_dims.size(); ++i) {
    double gain = act == Act::relu ? std::sqrt(2.0) : 5.0 / 3.0;
    layers.emplace_back(name + ".fc" + std::to_string(i), prev, hidden_dims[i],
                        rng, init, gain);
    prev = hidden_dims[i];
  }
  layers.emplace_back(name + ".head", prev, out, rng, init, head_gain);
}

Tensor Mlp::forward(Graph& g, Tensor x) {
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    x = layers[i].forward(g, x);
    x = act == Act::relu ? relu(x) : tanh_(x);
  }
  return layers.back().forward(g, x);
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    h = layers[i].forward(h);
    h = act == Act::relu ? Matrix(h.cwiseMax(0.0))
                         : Matrix(h.array().tanh().matrix());
  }
  return layers.back().forward(h);
}

void Mlp::collect(std::vector<Parameter*>& out) {
  for (auto& layer : layers) layer.collect(out);
}

}  // namespace dragonpit::rl
