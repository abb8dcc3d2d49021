#include "qpath/qnet.hpp"

#include "qpath/errors.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <tuple>
#include <ostream>

namespace qpath {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using GridMap = Eigen::Map<RowMat>;
using ConstGridMap = Eigen::Map<const RowMat>;

GridLayer make_grid(int channels, int m) {
  GridLayer l;
  l.channels = channels;
  l.m = m;
  l.w.assign(static_cast<std::size_t>(channels) * m * m, 0.0);
  l.b.assign(channels, 0.0);
  return l;
}

DenseLayer make_dense(int out, int in) {
  DenseLayer l;
  l.out = out;
  l.in = in;
  l.w.assign(static_cast<std::size_t>(out) * in, 0.0);
  l.b.assign(out, 0.0);
  return l;
}

void check_shape(const NetShape& s) {
  if (s.m <= 0 || s.e2e1 <= 0 || s.e2e2 <= 0 || s.e2n <= 0 || s.hidden <= 0) {
    throw ArgumentError("network shape entries must be positive");
  }
}

// Row sums plus column sums of W o S, broadcast into an s x s pre-activation.
void row_col(const double* grid, int m, const Eigen::MatrixXd& s_in, Eigen::VectorXd& r,
             Eigen::RowVectorXd& q) {
  const int s = static_cast<int>(s_in.rows());
  const ConstGridMap w(grid, m, m);
  const Eigen::MatrixXd p = w.topLeftCorner(s, s).cwiseProduct(s_in);
  r = p.rowwise().sum();
  q = p.colwise().sum();
}

Eigen::MatrixXd sum_channels(const std::vector<Eigen::MatrixXd>& input) {
  Eigen::MatrixXd s = input.at(0);
  for (std::size_t c = 1; c < input.size(); ++c) s += input[c];
  return s;
}

std::vector<Eigen::MatrixXd> e2e_apply(const Eigen::MatrixXd& s_in, const GridLayer& layer) {
  const int s = static_cast<int>(s_in.rows());
  if (s > layer.m || s_in.cols() != s) throw ArgumentError("e2e: input does not fit the layer");
  std::vector<Eigen::MatrixXd> out(layer.channels);
  Eigen::VectorXd r;
  Eigen::RowVectorXd q;
  for (int o = 0; o < layer.channels; ++o) {
    row_col(layer.grid(o), layer.m, s_in, r, q);
    out[o] = ((r.replicate(1, s) + q.replicate(s, 1)).array() + layer.b[o]).cwiseMax(0.0).matrix();
  }
  return out;
}

Eigen::MatrixXd e2n_apply(const Eigen::MatrixXd& s_in, const GridLayer& layer) {
  const int s = static_cast<int>(s_in.rows());
  if (s > layer.m || s_in.cols() != s) throw ArgumentError("e2n: input does not fit the layer");
  Eigen::MatrixXd out(s, layer.channels);
  Eigen::VectorXd r;
  Eigen::RowVectorXd q;
  for (int o = 0; o < layer.channels; ++o) {
    row_col(layer.grid(o), layer.m, s_in, r, q);
    out.col(o) = ((r + q.transpose()).array() + layer.b[o]).cwiseMax(0.0).matrix();
  }
  return out;
}

}  // namespace

QNetwork::QNetwork(const NetShape& shape) : shape_(shape) {
  check_shape(shape);
  e2e1 = make_grid(shape.e2e1, shape.m);
  e2e2 = make_grid(shape.e2e2, shape.m);
  e2n = make_grid(shape.e2n, shape.m);
  fc1 = make_dense(shape.hidden, shape.m * shape.e2n);
  fc2 = make_dense(shape.m, shape.hidden);
}

QNetwork QNetwork::initialized(const NetShape& shape, Rng& rng) {
  QNetwork net(shape);
  auto fill = [&rng](std::vector<double>& w, double fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& x : w) x = rng.uniform(-bound, bound);
  };
  fill(net.e2e1.w, 2.0 * shape.m);
  fill(net.e2e2.w, 2.0 * shape.m);
  fill(net.e2n.w, 2.0 * shape.m);
  fill(net.fc1.w, static_cast<double>(net.fc1.in));
  // The output layer starts at zero: every Q is 0 until trained, so argmax
  // choices are never driven by initialization noise.
  return net;
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for_each_array([&n](const std::vector<double>& a) { n += a.size(); });
  return n;
}

std::vector<Eigen::MatrixXd> e2e_forward(const std::vector<Eigen::MatrixXd>& input,
                                         const GridLayer& layer) {
  if (input.empty()) throw ArgumentError("e2e: no input channels");
  return e2e_apply(sum_channels(input), layer);
}

Eigen::MatrixXd e2n_forward(const std::vector<Eigen::MatrixXd>& input, const GridLayer& layer) {
  if (input.empty()) throw ArgumentError("e2n: no input channels");
  return e2n_apply(sum_channels(input), layer);
}

Eigen::VectorXd q_forward(const QNetwork& net, const MovingState& state) {
  ForwardCache cache;
  return q_forward(net, state, cache);
}

namespace {

// Merges the three channels into one strict upper-triangle entry list.
void summed_input(const MovingState& state, std::vector<MovingState::Entry>& out) {
  out.clear();
  for (int c = 0; c < 3; ++c) out.insert(out.end(), state.channel(c).begin(), state.channel(c).end());
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  std::size_t w = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (w > 0 && out[w - 1].i == out[k].i && out[w - 1].j == out[k].j) {
      out[w - 1].value += out[k].value;
    } else {
      out[w++] = out[k];
    }
  }
  out.resize(w);
}

using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Row and column sums of W o S over the s x s block, written to r and q.
void reduce_dense(const double* grid, int m, const RowMat& in, double* r, double* q) {
  const int s = static_cast<int>(in.rows());
  Eigen::Map<RowVec> qv(q, s);
  qv.setZero();
  for (int i = 0; i < s; ++i) {
    const Eigen::Map<const RowVec> w(grid + static_cast<std::size_t>(i) * m, s);
    r[i] = w.dot(in.row(i));
    qv += w.cwiseProduct(in.row(i));
  }
}

// sum_o relu(r(o, i) + q(o, j) + b_o) over the s x s block.
void sum_rectified(const RowMat& r, const RowMat& q, const std::vector<double>& b, RowMat& out) {
  const int s = static_cast<int>(r.cols());
  out.setZero(s, s);
  for (int i = 0; i < s; ++i) {
    for (int o = 0; o < r.rows(); ++o) {
      const double a = r(o, i) + b[o];
      out.row(i).array() += (q.row(o).array() + a).max(0.0);
    }
  }
}

// Row and column sums of the rectifier-masked upstream gradient.
void masked_reductions(const RowMat& r, const RowMat& q, int o, double bias, const RowMat& up,
                       Eigen::VectorXd& dr, RowVec& dq) {
  const int s = static_cast<int>(up.rows());
  dr.setZero(s);
  dq.setZero(s);
  const double* qo = q.row(o).data();
  double* dqp = dq.data();
  for (int i = 0; i < s; ++i) {
    const double a = r(o, i) + bias;
    const double* u = up.row(i).data();
    double acc = 0.0;
    for (int j = 0; j < s; ++j) {
      const double d = qo[j] + a > 0.0 ? u[j] : 0.0;
      acc += d;
      dqp[j] += d;
    }
    dr[i] = acc;
  }
}

// Gradient of a dense row-column grid for pre-activation gradient
// t(i, j) = dr_i + dq_j; also accumulates into d_in when given.
void dense_grid_backward(const double* grid, double* g, int m, const RowMat& in,
                         const Eigen::VectorXd& dr, const RowVec& dq, RowMat* d_in) {
  const int s = static_cast<int>(in.rows());
  const double* dqp = dq.data();
  for (int i = 0; i < s; ++i) {
    const double di = dr[i];
    const double* x = in.row(i).data();
    double* gr = g + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < s; ++j) gr[j] += (di + dqp[j]) * x[j];
    if (d_in) {
      const double* w = grid + static_cast<std::size_t>(i) * m;
      double* d = d_in->row(i).data();
      for (int j = 0; j < s; ++j) d[j] += w[j] * (di + dqp[j]);
    }
  }
}

}  // namespace

Eigen::VectorXd q_forward(const QNetwork& net, const MovingState& state, ForwardCache& cache) {
  if (state.m() != net.m()) throw ArgumentError("q_forward: state dimension differs from network");
  const int s = state.size();
  const int m = net.m();
  cache.valid = false;
  cache.s = s;
  summed_input(state, cache.input);

  // First E2E layer on the sparse input; each entry appears at (i,j) and (j,i).
  const int c1 = net.e2e1.channels;
  cache.r1.setZero(c1, s);
  cache.q1.setZero(c1, s);
  for (int o = 0; o < c1; ++o) {
    const double* w = net.e2e1.grid(o);
    for (const auto& e : cache.input) {
      const double p = w[static_cast<std::size_t>(e.i) * m + e.j] * e.value;
      const double t = w[static_cast<std::size_t>(e.j) * m + e.i] * e.value;
      cache.r1(o, e.i) += p;
      cache.q1(o, e.j) += p;
      cache.r1(o, e.j) += t;
      cache.q1(o, e.i) += t;
    }
  }
  sum_rectified(cache.r1, cache.q1, net.e2e1.b, cache.s2);

  const int c2 = net.e2e2.channels;
  cache.r2.resize(c2, s);
  cache.q2.resize(c2, s);
  for (int o = 0; o < c2; ++o) {
    reduce_dense(net.e2e2.grid(o), m, cache.s2, cache.r2.row(o).data(), cache.q2.row(o).data());
  }
  sum_rectified(cache.r2, cache.q2, net.e2e2.b, cache.s3);

  const int width = net.e2n.channels;
  cache.nodes.resize(s, width);
  Eigen::VectorXd r(s), q(s);
  for (int o = 0; o < width; ++o) {
    reduce_dense(net.e2n.grid(o), m, cache.s3, r.data(), q.data());
    cache.nodes.col(o) = ((r + q).array() + net.e2n.b[o]).max(0.0).matrix();
  }

  // Flattened node features: index i * channels + c. Rows beyond s are zero.
  const Eigen::Map<const Eigen::VectorXd> flat(cache.nodes.data(), static_cast<Eigen::Index>(s) * width);
  const Eigen::Map<const RowMat> w1(net.fc1.w.data(), net.fc1.out, net.fc1.in);
  const Eigen::Map<const Eigen::VectorXd> b1(net.fc1.b.data(), net.fc1.out);
  cache.hidden = (w1.leftCols(static_cast<Eigen::Index>(s) * width) * flat + b1).cwiseMax(0.0);

  const Eigen::Map<const RowMat> w2(net.fc2.w.data(), net.fc2.out, net.fc2.in);
  const Eigen::Map<const Eigen::VectorXd> b2(net.fc2.b.data(), net.fc2.out);
  cache.out = w2 * cache.hidden + b2;
  cache.valid = true;
  return cache.out;
}

void GradientSet::clear() {
  const int s = extent;
  const int m = g.m();
  auto clear_grid = [s, m](GridLayer& l) {
    for (int o = 0; o < l.channels; ++o) GridMap(l.grid(o), m, m).topLeftCorner(s, s).setZero();
    std::fill(l.b.begin(), l.b.end(), 0.0);
  };
  clear_grid(g.e2e1);
  clear_grid(g.e2e2);
  clear_grid(g.e2n);
  Eigen::Map<RowMat>(g.fc1.w.data(), g.fc1.out, g.fc1.in)
      .leftCols(static_cast<Eigen::Index>(s) * g.e2n.channels)
      .setZero();
  std::fill(g.fc1.b.begin(), g.fc1.b.end(), 0.0);
  std::fill(g.fc2.w.begin(), g.fc2.w.end(), 0.0);
  std::fill(g.fc2.b.begin(), g.fc2.b.end(), 0.0);
  extent = 0;
}

void q_backward(const QNetwork& net, const ForwardCache& cache, const Eigen::VectorXd& d_out,
                GradientSet& grads) {
  if (!cache.valid) throw UsageError("q_backward called without a forward cache");
  if (d_out.size() != net.m()) throw ArgumentError("q_backward: output gradient size differs");
  if (!(grads.g.shape() == net.shape())) throw ArgumentError("q_backward: gradient shape differs");
  const int s = cache.s;
  const int m = net.m();
  const int width = net.e2n.channels;
  const Eigen::Index flat_n = static_cast<Eigen::Index>(s) * width;
  grads.extent = std::max(grads.extent, s);
  QNetwork& g = grads.g;

  // fc2 and fc1 only visit rows with a nonzero upstream gradient; the loss
  // usually touches a single output.
  Eigen::Map<RowMat> g2(g.fc2.w.data(), g.fc2.out, g.fc2.in);
  const Eigen::Map<const RowMat> w2(net.fc2.w.data(), net.fc2.out, net.fc2.in);
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(net.fc2.in);
  for (Eigen::Index k = 0; k < d_out.size(); ++k) {
    if (d_out[k] == 0.0) continue;
    g2.row(k) += d_out[k] * cache.hidden.transpose();
    g.fc2.b[k] += d_out[k];
    dh += d_out[k] * w2.row(k).transpose();
  }

  const Eigen::Map<const RowVec> flat(cache.nodes.data(), flat_n);
  Eigen::Map<RowMat> g1(g.fc1.w.data(), g.fc1.out, g.fc1.in);
  const Eigen::Map<const RowMat> w1(net.fc1.w.data(), net.fc1.out, net.fc1.in);
  RowVec dflat = RowVec::Zero(flat_n);
  for (Eigen::Index k = 0; k < dh.size(); ++k) {
    if (cache.hidden[k] <= 0.0 || dh[k] == 0.0) continue;
    g1.row(k).head(flat_n) += dh[k] * flat;
    g.fc1.b[k] += dh[k];
    dflat += dh[k] * w1.row(k).head(flat_n);
  }

  // e2n: pre-activation gradient t(i, j) = dp_i + dp_j.
  RowMat ds3 = RowMat::Zero(s, s);
  Eigen::VectorXd dp(s);
  RowVec dpq(s);
  for (int o = 0; o < width; ++o) {
    for (int i = 0; i < s; ++i) {
      dp[i] = cache.nodes(i, o) > 0.0 ? dflat[static_cast<Eigen::Index>(i) * width + o] : 0.0;
    }
    dpq = dp.transpose();
    g.e2n.b[o] += dp.sum();
    dense_grid_backward(net.e2n.grid(o), g.e2n.grid(o), m, cache.s3, dp, dpq, &ds3);
  }

  // e2e2
  RowMat ds2 = RowMat::Zero(s, s);
  Eigen::VectorXd dr;
  RowVec dq;
  for (int o = 0; o < net.e2e2.channels; ++o) {
    masked_reductions(cache.r2, cache.q2, o, net.e2e2.b[o], ds3, dr, dq);
    g.e2e2.b[o] += dr.sum();
    dense_grid_backward(net.e2e2.grid(o), g.e2e2.grid(o), m, cache.s2, dr, dq, &ds2);
  }

  // e2e1: weights only touch the sparse input entries.
  for (int o = 0; o < net.e2e1.channels; ++o) {
    masked_reductions(cache.r1, cache.q1, o, net.e2e1.b[o], ds2, dr, dq);
    g.e2e1.b[o] += dr.sum();
    double* gw = g.e2e1.grid(o);
    for (const auto& e : cache.input) {
      gw[static_cast<std::size_t>(e.i) * m + e.j] += (dr[e.i] + dq[e.j]) * e.value;
      gw[static_cast<std::size_t>(e.j) * m + e.i] += (dr[e.j] + dq[e.i]) * e.value;
    }
  }
}

namespace {

// Calls f(param, grad, m1, m2) over the span of every parameter that may be
// nonzero-gradient or nonzero-moment for states up to size s.
template <typename F>
void for_each_active(QNetwork& net, const QNetwork& g, QNetwork& m1, QNetwork& m2, int s, F&& f) {
  const int m = net.m();
  auto grid = [&](GridLayer& p, const GridLayer& gp, GridLayer& a, GridLayer& b) {
    for (int o = 0; o < p.channels; ++o) {
      for (int i = 0; i < s; ++i) {
        const std::size_t off = static_cast<std::size_t>(o) * m * m + static_cast<std::size_t>(i) * m;
        f(p.w.data() + off, gp.w.data() + off, a.w.data() + off, b.w.data() + off, s);
      }
    }
    f(p.b.data(), gp.b.data(), a.b.data(), b.b.data(), p.channels);
  };
  grid(net.e2e1, g.e2e1, m1.e2e1, m2.e2e1);
  grid(net.e2e2, g.e2e2, m1.e2e2, m2.e2e2);
  grid(net.e2n, g.e2n, m1.e2n, m2.e2n);
  const int cols = s * net.e2n.channels;
  for (int r = 0; r < net.fc1.out; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * net.fc1.in;
    f(net.fc1.w.data() + off, g.fc1.w.data() + off, m1.fc1.w.data() + off, m2.fc1.w.data() + off,
      cols);
  }
  f(net.fc1.b.data(), g.fc1.b.data(), m1.fc1.b.data(), m2.fc1.b.data(), net.fc1.out);
  f(net.fc2.w.data(), g.fc2.w.data(), m1.fc2.w.data(), m2.fc2.w.data(),
    static_cast<int>(net.fc2.w.size()));
  f(net.fc2.b.data(), g.fc2.b.data(), m1.fc2.b.data(), m2.fc2.b.data(), net.fc2.out);
}

}  // namespace

void optimizer_step(QNetwork& net, const GradientSet& grads, OptimizerState& opt) {
  if (!(grads.g.shape() == net.shape()) || !(opt.m1.shape() == net.shape())) {
    throw ArgumentError("optimizer_step: shape mismatch");
  }
  const int s = std::max(grads.extent, opt.extent);
  bool finite = true;
  const QNetwork& g = grads.g;
  for_each_active(net, g, opt.m1, opt.m2, s,
                  [&finite](double*, const double* gp, double*, double*, int n) {
                    for (int k = 0; k < n; ++k) finite = finite && std::isfinite(gp[k]);
                  });
  if (!finite) throw TrainingDivergence("non-finite gradient");

  ++opt.step;
  opt.extent = s;
  const AdamConfig c = opt.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.step));
  for_each_active(net, g, opt.m1, opt.m2, s,
                  [&c, bc1, bc2](double* p, const double* gp, double* a, double* b, int n) {
                    for (int k = 0; k < n; ++k) {
                      a[k] = c.beta1 * a[k] + (1.0 - c.beta1) * gp[k];
                      b[k] = c.beta2 * b[k] + (1.0 - c.beta2) * gp[k] * gp[k];
                      p[k] -= c.lr * (a[k] / bc1) / (std::sqrt(b[k] / bc2) + c.eps);
                    }
                  });
}

void copy_to_target(const QNetwork& net, QNetwork& target, int extent) {
  if (extent < 0 || !(target.shape() == net.shape())) {
    target = net;
    return;
  }
  // Reuse the traversal with the target in the parameter slot.
  for_each_active(target, net, target, target, extent,
                  [](double* dst, const double* from, double*, double*, int n) {
                    std::memcpy(dst, from, sizeof(double) * static_cast<std::size_t>(n));
                  });
}

QNetwork copy_to_target(const QNetwork& net) { return net; }

namespace {

constexpr char kMagic[8] = {'Q', 'P', 'A', 'T', 'H', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kBlob = "network blob";
using binio::put;

template <typename T>
T get(std::istream& in) {
  return binio::get<T>(in, kBlob);
}

}  // namespace

void QNetwork::write(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  for (int v : {shape_.m, shape_.e2e1, shape_.e2e2, shape_.e2n, shape_.hidden}) {
    put<std::int32_t>(out, v);
  }
  for_each_array([&out](const std::vector<double>& a) {
    for (double x : a) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  });
}

QNetwork QNetwork::read(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ParseError("not a network blob (bad magic tag)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ParseError("unsupported network blob version " + std::to_string(version));
  NetShape shape;
  shape.m = get<std::int32_t>(in);
  shape.e2e1 = get<std::int32_t>(in);
  shape.e2e2 = get<std::int32_t>(in);
  shape.e2n = get<std::int32_t>(in);
  shape.hidden = get<std::int32_t>(in);
  if (shape.m <= 0 || shape.m > 100000 || shape.e2e1 <= 0 || shape.e2e2 <= 0 || shape.e2n <= 0 ||
      shape.hidden <= 0) {
    throw ParseError("network blob has an invalid shape header");
  }
  QNetwork net(shape);
  net.for_each_array([&in](std::vector<double>& a) {
    for (double& x : a) x = std::bit_cast<double>(get<std::uint64_t>(in));
  });
  return net;
}

}  // namespace qpath
