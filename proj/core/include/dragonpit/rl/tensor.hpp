#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dragonpit::rl {

using Matrix = Eigen::MatrixXd;

struct TensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trainable weight. Lives outside any graph; graphs borrow it as a leaf and
// add into `grad` on backward.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
};

class Graph;

// Handle into a graph node. Cheap to copy; valid while the graph lives.
struct Tensor {
  Graph* g = nullptr;
  int node = -1;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

enum class Op : std::uint8_t {
  leaf,
  matmul,
  add,
  add_rowvec,
  sub,
  mul,
  min_elem,
  scale,        // alpha * x + beta
  transpose,
  relu,
  elu,
  tanh_,
  sigmoid,
  abs_,
  exp_,
  log_,
  clamp_,       // [alpha, beta]
  softmax_rows,
  log_softmax_rows,
  row_sum,      // [R,C] -> [R,1]
  col_sum,      // [R,C] -> [1,C]
  sum_all,      // [R,C] -> [1,1]
  mean_all,     // [R,C] -> [1,1]
  gather_cols,  // per-row column pick -> [R,1]
  concat_cols,
  concat_rows,
  slice_cols,   // columns [i0, i0+i1)
  group_rows,   // [G*k, C] -> [G, k*C], k = i0
  ungroup_rows, // [G, k*C] -> [G*k, C], k = i0
  repeat_rows,  // [R, C] -> [R*k, C], k = i0, row-major repetition
  sum_row_groups, // [G*k, C] -> [G, C], sums consecutive k-row groups
  broadcast_col,// [R,1] -> [R,k], k = i0
  huber,        // elementwise huber(pred - target), delta = alpha
  stop_gradient,
};

// Eager define-by-run autodiff over dense double matrices. Values are
// computed at op creation; backward() replays the tape in reverse.
class Graph {
 public:
  Tensor constant(Matrix v);
  // Repeated calls with the same parameter return the same leaf, so shared
  // weights accumulate one gradient.
  Tensor param(Parameter& p);

  // Seeds d(root)/d(root) = 1 (root must be 1x1) and accumulates into every
  // reachable Parameter's grad.
  void backward(Tensor root);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend struct Tensor;
  friend Tensor emit(Graph& g, Op op, Matrix value, int a, int b, double alpha,
                     double beta, int i0, std::vector<int> index);

  struct Node {
    Op op = Op::leaf;
    int a = -1;
    int b = -1;
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    double alpha = 0;
    double beta = 0;
    int i0 = 0;
    std::vector<int> index;
    Parameter* owner = nullptr;
  };

  void accumulate(int node, const Matrix& g);
  void backprop_node(int i);

  std::vector<Node> nodes_;
  std::map<const Parameter*, int> param_leaves_;
};

// --- op builders -----------------------------------------------------------

Tensor matmul(Tensor a, Tensor b);
Tensor add(Tensor a, Tensor b);
Tensor add_rowvec(Tensor a, Tensor bias);  // bias is [1,C]
Tensor sub(Tensor a, Tensor b);
Tensor mul(Tensor a, Tensor b);
Tensor min_elem(Tensor a, Tensor b);
Tensor scale(Tensor a, double alpha, double beta = 0);  // alpha*x + beta
Tensor transpose(Tensor a);
Tensor relu(Tensor a);
Tensor elu(Tensor a);
Tensor tanh_(Tensor a);
Tensor sigmoid(Tensor a);
Tensor abs_(Tensor a);
Tensor exp_(Tensor a);
Tensor log_(Tensor a);
Tensor clamp_(Tensor a, double lo, double hi);
Tensor softmax_rows(Tensor a);
Tensor log_softmax_rows(Tensor a);
Tensor row_sum(Tensor a);
Tensor col_sum(Tensor a);
Tensor sum_all(Tensor a);
Tensor mean_all(Tensor a);
Tensor gather_cols(Tensor a, const std::vector<int>& cols);
Tensor concat_cols(Tensor a, Tensor b);
Tensor concat_rows(Tensor a, Tensor b);
Tensor slice_cols(Tensor a, int first, int count);
Tensor group_rows(Tensor a, int k);
Tensor ungroup_rows(Tensor a, int k);
Tensor repeat_rows(Tensor a, int k);
Tensor sum_row_groups(Tensor a, int k);
Tensor broadcast_col(Tensor a, int k);
Tensor huber(Tensor pred, Tensor target, double delta);
Tensor stop_gradient(Tensor a);

inline Tensor operator+(Tensor a, Tensor b) { return add(a, b); }
inline Tensor operator-(Tensor a, Tensor b) { return sub(a, b); }
inline Tensor operator*(Tensor a, Tensor b) { return mul(a, b); }
inline Tensor operator*(double s, Tensor a) { return scale(a, s); }

// --- optimizer -------------------------------------------------------------

// Returns the pre-clip global L2 norm; scales grads in place when above cap.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

class Adam {
 public:
  Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void zero_grad();
  void step();
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long long t_ = 0;
};

}  // namespace dragonpit::rl
