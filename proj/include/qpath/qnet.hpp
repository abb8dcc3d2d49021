#pragma once

#include "qpath/random.hpp"
#include "qpath/state.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qpath {

struct NetShape {
  int m = 0;
  int e2e1 = 8;     // output channels of the first E2E layer
  int e2e2 = 16;    // output channels of the second E2E layer
  int e2n = 16;     // node features
  int hidden = 256;

  bool operator==(const NetShape&) const = default;
};

// Row-column convolution layer: one m x m weight grid per output channel,
// applied to the sum of the input channels, plus a per-channel bias.
struct GridLayer {
  int channels = 0;
  int m = 0;
  std::vector<double> w;  // channels * m * m, row-major per channel
  std::vector<double> b;  // channels

  double* grid(int o) { return w.data() + static_cast<std::size_t>(o) * m * m; }
  const double* grid(int o) const { return w.data() + static_cast<std::size_t>(o) * m * m; }
};

struct DenseLayer {
  int out = 0;
  int in = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

// Two E2E layers, one E2N layer, two fully connected layers; maps an m x m x 3
// state to m Q-values. Activations of padding indices (beyond state.size())
// are held at zero, which keeps the cost proportional to the occupied block.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(const NetShape& shape);

  // Uniform fan-in scaled weights, zero biases, zero output layer.
  static QNetwork initialized(const NetShape& shape, Rng& rng);

  const NetShape& shape() const { return shape_; }
  int m() const { return shape_.m; }

  GridLayer e2e1, e2e2, e2n;
  DenseLayer fc1, fc2;

  std::size_t parameter_count() const;
  // Visits every parameter array in a fixed order.
  template <typename F>
  void for_each_array(F&& f) {
    f(e2e1.w); f(e2e1.b); f(e2e2.w); f(e2e2.b); f(e2n.w); f(e2n.b);
    f(fc1.w); f(fc1.b); f(fc2.w); f(fc2.b);
  }
  template <typename F>
  void for_each_array(F&& f) const {
    f(e2e1.w); f(e2e1.b); f(e2e2.w); f(e2e2.b); f(e2n.w); f(e2n.b);
    f(fc1.w); f(fc1.b); f(fc2.w); f(fc2.b);
  }

  void write(std::ostream& out) const;
  static QNetwork read(std::istream& in);

 private:
  NetShape shape_;
};

// Activations kept for the backward pass. Row-column layers are stored as
// their row and column reductions (channels x s); rectified activations are
// recomputed from them.
struct ForwardCache {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  int s = 0;
  std::vector<MovingState::Entry> input;  // summed channels, strict upper triangle
  RowMat r1, q1;                          // first E2E reductions
  RowMat s2;                              // s x s, summed first E2E output
  RowMat r2, q2;
  RowMat s3;
  RowMat nodes;                           // s x e2n rectified
  Eigen::VectorXd hidden;                 // rectified fc1 output
  Eigen::VectorXd out;                    // m Q-values
  bool valid = false;
};

// Single E2E layer on dense s x s input channels (used by tests and forward).
std::vector<Eigen::MatrixXd> e2e_forward(const std::vector<Eigen::MatrixXd>& input,
                                         const GridLayer& layer);
// E2N layer: s x channels node features.
Eigen::MatrixXd e2n_forward(const std::vector<Eigen::MatrixXd>& input, const GridLayer& layer);

Eigen::VectorXd q_forward(const QNetwork& net, const MovingState& state);
Eigen::VectorXd q_forward(const QNetwork& net, const MovingState& state, ForwardCache& cache);

// Gradient buffers shaped like a network. `extent` is the largest occupied
// state size accumulated so far; entries outside it are known to be zero.
struct GradientSet {
  QNetwork g;
  int extent = 0;

  explicit GradientSet(const NetShape& shape) : g(shape) {}
  void clear();
};

// Adds d(loss)/d(params) for the cached forward pass, given d(loss)/d(out).
// Throws UsageError without a valid cache.
void q_backward(const QNetwork& net, const ForwardCache& cache, const Eigen::VectorXd& d_out,
                GradientSet& grads);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamConfig cfg;
  QNetwork m1, m2;
  long long step = 0;
  int extent = 0;  // moments outside the extent are zero

  OptimizerState() = default;
  OptimizerState(const NetShape& shape, AdamConfig cfg) : cfg(cfg), m1(shape), m2(shape) {}
};

// One adaptive-moment step. Parameters whose gradient and moments are both
// zero are skipped, which is exact because their update is zero. Throws
// TrainingDivergence on a non-finite gradient.
void optimizer_step(QNetwork& net, const GradientSet& grads, OptimizerState& opt);

// Copies parameters into an existing target. When `extent` is given, only
// parameters that can have changed for states of that size are copied.
void copy_to_target(const QNetwork& net, QNetwork& target, int extent = -1);
QNetwork copy_to_target(const QNetwork& net);

}  // namespace qpath
