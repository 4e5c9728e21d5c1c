#pragma once

#include "dragonpit/rl/tensor.hpp"
#include "dragonpit/rng.hpp"

namespace dragonpit::rl {

// Deterministic standard normal (Box-Muller over the portable uniform).
double normal_sample(SeededRng& rng);

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                      SeededRng& rng);
Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, SeededRng& rng);
// Gain-scaled orthogonal basis (QR of a normal draw, sign-fixed).
Matrix orthogonal_matrix(Eigen::Index rows, Eigen::Index cols, double gain,
                         SeededRng& rng);

void copy_values(const std::vector<Parameter*>& src,
                 const std::vector<Parameter*>& dst);

enum class Init { fan_in_uniform, orthogonal };

struct Linear {
  Parameter w;  // [in, out]
  Parameter b;  // [1, out]

  Linear() = default;
  Linear(const std::string& name, int in, int out, SeededRng& rng,
         Init init = Init::fan_in_uniform, double gain = 1.0);

  Tensor forward(Graph& g, Tensor x);
  Matrix forward(const Matrix& x) const;
  void collect(std::vector<Parameter*>& out);
};

// Gated recurrent cell matching the usual split-bias formulation:
//   r = sig(x Wxr + bxr + h Whr + bhr)
//   z = sig(x Wxz + bxz + h Whz + bhz)
//   n = tanh(x Wxn + bxn + r * (h Whn + bhn))
//   h' = (1 - z) * n + z * h
struct GruCell {
  int hidden = 0;
  Parameter wxr, wxz, wxn;  // [in, H]
  Parameter whr, whz, whn;  // [H, H]
  Parameter bxr, bxz, bxn, bhr, bhz, bhn;  // [1, H]

  GruCell() = default;
  GruCell(const std::string& name, int in, int hidden_dim, SeededRng& rng);

  Tensor step(Graph& g, Tensor x, Tensor h);
  Matrix step(const Matrix& x, const Matrix& h) const;
  void collect(std::vector<Parameter*>& out);
};

// Recurrent per-agent network: fc + relu, GRU, fc head. All agents share one
// instance; rows carry (batch x agent) slots.
struct AgentNet {
  int input = 0;
  int hidden = 0;
  int output = 0;
  Linear fc1;
  GruCell gru;
  Linear fc2;

  AgentNet() = default;
  AgentNet(const std::string& name, int in, int hidden_dim, int out,
           SeededRng& rng);

  Matrix initial_hidden(Eigen::Index rows) const {
    return Matrix::Zero(rows, hidden);
  }
  // Returns {head output, next hidden}.
  std::pair<Tensor, Tensor> forward(Graph& g, Tensor x, Tensor h);
  std::pair<Matrix, Matrix> forward(const Matrix& x, const Matrix& h) const;
  void collect(std::vector<Parameter*>& out);
};

enum class Act { relu, tanh };

// Plain feed-forward stack; activation between layers, linear output.
struct Mlp {
  std::vector<Linear> layers;
  Act act = Act::relu;

  Mlp() = default;
  Mlp(const std::string& name, int in, const std::vector<int>& hidden_dims,
      int out, Act act, SeededRng& rng, Init init = Init::fan_in_uniform,
      double head_gain = 1.0);

  Tensor forward(Graph& g, Tensor x);
  Matrix forward(const Matrix& x) const;
  void collect(std::vector<Parameter*>& out);
};

}  // namespace dragonpit::rl
