#include "doctest.h"

#include "oracles.hpp"
#include "qpath/errors.hpp"
#include "qpath/qnet.hpp"

#include <sstream>

using namespace qpath;

namespace {

GridLayer grid(int channels, int m, double w, double b) {
  GridLayer l;
  l.channels = channels;
  l.m = m;
  l.w.assign(static_cast<std::size_t>(channels) * m * m, w);
  l.b.assign(channels, b);
  return l;
}

NetShape small_shape(int m) {
  NetShape s;
  s.m = m;
  return s;
}

QNetwork random_net(int m, Rng& rng) {
  QNetwork net = QNetwork::initialized(small_shape(m), rng);
  net.for_each_array([&rng](std::vector<double>& a) {
    if (a.size() < 300) {
      for (double& x : a) x = rng.uniform(-0.1, 0.1);
    }
  });
  return net;
}

}  // namespace

TEST_CASE("e2e on a single element is twice w a") {
  GridLayer l = grid(1, 1, 0.7, 0.0);
  Eigen::MatrixXd a(1, 1);
  a << 1.5;
  const auto out = e2e_forward({a}, l);
  CHECK(out[0](0, 0) == doctest::Approx(2 * 0.7 * 1.5));
}

TEST_CASE("e2e with zero input is the bias") {
  GridLayer l = grid(2, 3, 0.3, 0.25);
  const auto out = e2e_forward({Eigen::MatrixXd::Zero(3, 3)}, l);
  CHECK(out[1](2, 1) == 0.25);
}

TEST_CASE("e2e hand example") {
  GridLayer l = grid(1, 2, 0.0, 0.0);
  l.w = {1, 0, 0, 1};
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  const auto out = e2e_forward({a}, l);
  // Pre-activation is zero everywhere for this input.
  CHECK(out[0](0, 1) == 0.0);
  CHECK(out[0](0, 0) == 0.0);
  Eigen::MatrixXd b(2, 2);
  b << 1, 0, 0, 0;
  CHECK(e2e_forward({b}, l)[0](0, 0) == 2.0);
}

TEST_CASE("e2n with symmetric input and weights doubles the row sum") {
  GridLayer l = grid(1, 3, 0.0, 0.1);
  l.w = {0.1, 0.2, 0.3, 0.2, 0.4, 0.5, 0.3, 0.5, 0.6};
  Eigen::MatrixXd a(3, 3);
  a << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  const Eigen::MatrixXd f = e2n_forward({a}, l);
  for (int i = 0; i < 3; ++i) {
    double row = 0;
    for (int k = 0; k < 3; ++k) row += l.w[i * 3 + k] * a(i, k);
    CHECK(f(i, 0) == doctest::Approx(2 * row + 0.1));
  }
  GridLayer z = grid(1, 3, 0.0, 0.4);
  CHECK(e2n_forward({a}, z)(1, 0) == 0.4);
}

TEST_CASE("row-column layers agree with scalar loops") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + rng.below(8);
    const int s = 1 + rng.below(m);
    GridLayer l = grid(3, m, 0.0, 0.0);
    for (double& w : l.w) w = rng.uniform(-1, 1);
    for (double& b : l.b) b = rng.uniform(-0.5, 0.5);
    std::vector<Eigen::MatrixXd> in;
    std::vector<oracle::Mat> in_o;
    for (int c = 0; c < 2; ++c) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Random(s, s);
      in.push_back(a);
      oracle::Mat ao = oracle::zeros(s);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) ao[i][j] = a(i, j);
      in_o.push_back(ao);
    }
    const auto got = e2e_forward(in, l);
    const auto want = oracle::e2e(in_o, l);
    const Eigen::MatrixXd gn = e2n_forward(in, l);
    const auto wn = oracle::e2n(in_o, l);
    for (int o = 0; o < 3; ++o) {
      for (int i = 0; i < s; ++i) {
        CHECK(std::abs(gn(i, o) - wn[i][o]) <= 1e-12);
        for (int j = 0; j < s; ++j) CHECK(std::abs(got[o](i, j) - want[o][i][j]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("q_forward shape and zero network") {
  const QNetwork net(small_shape(6));
  Rng rng(1);
  const MovingState st = oracle::random_state(6, 4, 0.5, rng);
  const Eigen::VectorXd q = q_forward(net, st);
  CHECK(q.size() == 6);
  CHECK(q.norm() == 0.0);
  CHECK_THROWS_AS(q_forward(net, MovingState(7, 2)), ArgumentError);
}

TEST_CASE("q_forward matches the scalar oracle, including padding") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const QNetwork net = random_net(8, rng);
    const MovingState st = oracle::random_state(8, 5, 0.6, rng);
    const Eigen::VectorXd q = q_forward(net, st);
    const auto want = oracle::forward(net, st);
    for (int j = 0; j < 8; ++j) CHECK(q[j] == doctest::Approx(want.out[j]).epsilon(1e-12));
  }
}

TEST_CASE("final layer is linear") {
  Rng rng(3);
  QNetwork net = random_net(6, rng);
  const MovingState st = oracle::random_state(6, 6, 0.5, rng);
  std::fill(net.fc2.b.begin(), net.fc2.b.end(), 0.0);
  const Eigen::VectorXd q = q_forward(net, st);
  for (double& w : net.fc2.w) w *= 2;
  CHECK((q_forward(net, st) - 2 * q).norm() <= 1e-12 * (1 + q.norm()));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(21);
  for (int trial = 0; trial < 3; ++trial) {
    const QNetwork net = random_net(8, rng);
    const MovingState st = oracle::random_state(8, 8, 0.5, rng);
    std::vector<double> c(8);
    for (double& x : c) x = rng.uniform(-1, 1);
    const auto res = oracle::check_gradients(net, st, c, 1e-4);
    CHECK(res.failed == 0);
    CHECK(res.checked > res.skipped);
  }
}

TEST_CASE("backward details") {
  Rng rng(4);
  const QNetwork net = random_net(6, rng);
  const MovingState st = oracle::random_state(6, 4, 0.5, rng);
  GradientSet grads(net.shape());
  ForwardCache cache;
  CHECK_THROWS_AS(q_backward(net, cache, Eigen::VectorXd::Zero(6), grads), UsageError);
  q_forward(net, st, cache);
  q_backward(net, cache, Eigen::VectorXd::Zero(6), grads);
  double total = 0;
  grads.g.for_each_array([&total](const std::vector<double>& a) {
    for (double x : a) total += std::abs(x);
  });
  CHECK(total == 0.0);

  // A dead hidden unit passes no gradient to its incoming weights.
  Eigen::VectorXd d = Eigen::VectorXd::Ones(6);
  q_backward(net, cache, d, grads);
  for (int r = 0; r < net.fc1.out; ++r) {
    if (cache.hidden[r] > 0) continue;
    for (int k = 0; k < net.fc1.in; ++k) CHECK(grads.g.fc1.w[r * net.fc1.in + k] == 0.0);
  }
  // Padding nodes never receive gradient.
  for (int k = 4 * net.e2n.channels; k < net.fc1.in; ++k) CHECK(grads.g.fc1.w[k] == 0.0);
}

TEST_CASE("adaptive step by hand") {
  NetShape shape;
  shape.m = 1;
  shape.e2e1 = shape.e2e2 = shape.e2n = shape.hidden = 1;
  QNetwork net(shape);
  net.fc2.b[0] = 1.0;
  GradientSet g(shape);
  OptimizerState opt(shape, AdamConfig{});
  QNetwork before = net;
  optimizer_step(net, g, opt);
  CHECK(net.fc2.b[0] == 1.0);
  CHECK(opt.step == 1);

  g.g.fc2.b[0] = 0.5;
  optimizer_step(net, g, opt);
  // step 2: m = 0.05, v = 0.00025; corrections 0.19 and 0.001999.
  const double mh = 0.05 / (1 - 0.81);
  const double vh = 0.00025 / (1 - 0.999 * 0.999);
  CHECK(net.fc2.b[0] == doctest::Approx(1.0 - 1e-3 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));

  QNetwork x = before, y = before;
  OptimizerState ox(shape, AdamConfig{}), oy(shape, AdamConfig{});
  optimizer_step(x, g, ox);
  optimizer_step(y, g, oy);
  CHECK(x.fc2.b == y.fc2.b);

  g.g.fc2.b[0] = std::nan("");
  CHECK_THROWS_AS(optimizer_step(net, g, opt), TrainingDivergence);
}

TEST_CASE("target copies are independent") {
  Rng rng(8);
  QNetwork net = random_net(6, rng);
  const MovingState st = oracle::random_state(6, 6, 0.5, rng);
  QNetwork target = copy_to_target(net);
  CHECK(q_forward(net, st) == q_forward(target, st));

  ForwardCache cache;
  q_forward(net, st, cache);
  GradientSet g(net.shape());
  q_backward(net, cache, Eigen::VectorXd::Ones(6), g);
  OptimizerState opt(net.shape(), AdamConfig{});
  const Eigen::VectorXd t0 = q_forward(target, st);
  optimizer_step(net, g, opt);
  CHECK(q_forward(net, st) != q_forward(target, st));
  CHECK(q_forward(target, st) == t0);

  copy_to_target(net, target, 6);
  CHECK(q_forward(net, st) == q_forward(target, st));
}

TEST_CASE("lazy moments give the same result as dense Adam") {
  Rng rng(12);
  QNetwork net = random_net(8, rng);
  const MovingState st = oracle::random_state(8, 5, 0.5, rng);
  QNetwork ref = net;
  OptimizerState opt(net.shape(), AdamConfig{});
  std::vector<std::vector<double>> m1, m2;
  ref.for_each_array([&](const std::vector<double>& a) {
    m1.emplace_back(a.size(), 0.0);
    m2.emplace_back(a.size(), 0.0);
  });
  for (int step = 1; step <= 3; ++step) {
    ForwardCache cache;
    q_forward(net, st, cache);
    GradientSet g(net.shape());
    q_backward(net, cache, Eigen::VectorXd::Ones(8), g);
    optimizer_step(net, g, opt);
    std::size_t idx = 0;
    std::vector<const std::vector<double>*> gs;
    g.g.for_each_array([&gs](const std::vector<double>& a) { gs.push_back(&a); });
    ref.for_each_array([&](std::vector<double>& p) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double gk = (*gs[idx])[k];
        m1[idx][k] = 0.9 * m1[idx][k] + (1.0 - 0.9) * gk;
        m2[idx][k] = 0.999 * m2[idx][k] + (1.0 - 0.999) * gk * gk;
        p[k] -= 1e-3 * (m1[idx][k] / (1.0 - std::pow(0.9, static_cast<double>(step)))) /
                (std::sqrt(m2[idx][k] / (1.0 - std::pow(0.999, static_cast<double>(step)))) + 1e-8);
      }
      ++idx;
    });
  }
  std::vector<const std::vector<double>*> a, b;
  net.for_each_array([&a](const std::vector<double>& x) { a.push_back(&x); });
  ref.for_each_array([&b](const std::vector<double>& x) { b.push_back(&x); });
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
}

TEST_CASE("network serialization round-trips") {
  Rng rng(6);
  const QNetwork net = random_net(5, rng);
  std::stringstream ss;
  net.write(ss);
  const QNetwork back = QNetwork::read(ss);
  CHECK(back.shape() == net.shape());
  CHECK(back.fc1.w == net.fc1.w);
  CHECK(back.e2e2.w == net.e2e2.w);
  std::stringstream bad("NOTANET!");
  CHECK_THROWS_AS(QNetwork::read(bad), ParseError);
}
