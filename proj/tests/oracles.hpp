#pragma once

// Scalar-loop reference implementations used to check the library.

#include "qpath/qnet.hpp"
#include "qpath/random.hpp"
#include "qpath/state.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(int n) { return Mat(n, std::vector<double>(n, 0.0)); }

// Pre-activation of one row-column layer on a list of input channels.
inline Mat row_col_pre(const std::vector<Mat>& in, const qpath::GridLayer& l, int o) {
  const int s = static_cast<int>(in[0].size());
  const int m = l.m;
  const double* w = l.grid(o);
  // The row term depends on i only, the column term on j only.
  std::vector<double> row(s, 0.0), col(s, 0.0);
  for (const Mat& a : in) {
    for (int i = 0; i < s; ++i) {
      for (int k = 0; k < s; ++k) row[i] += w[i * m + k] * a[i][k];
    }
    for (int j = 0; j < s; ++j) {
      for (int k = 0; k < s; ++k) col[j] += w[k * m + j] * a[k][j];
    }
  }
  Mat out = zeros(s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) out[i][j] = l.b[o] + row[i] + col[j];
  }
  return out;
}

inline std::vector<Mat> e2e(const std::vector<Mat>& in, const qpath::GridLayer& l,
                            std::vector<std::uint8_t>* pattern = nullptr) {
  std::vector<Mat> out;
  for (int o = 0; o < l.channels; ++o) {
    Mat p = row_col_pre(in, l, o);
    for (auto& row : p) {
      for (double& x : row) {
        if (pattern) pattern->push_back(x > 0);
        x = std::max(0.0, x);
      }
    }
    out.push_back(p);
  }
  return out;
}

// Node features [i][o]: diagonal of the row-column pre-activation.
inline Mat e2n(const std::vector<Mat>& in, const qpath::GridLayer& l,
               std::vector<std::uint8_t>* pattern = nullptr) {
  const int s = static_cast<int>(in[0].size());
  Mat out(s, std::vector<double>(l.channels, 0.0));
  for (int o = 0; o < l.channels; ++o) {
    const Mat p = row_col_pre(in, l, o);
    for (int i = 0; i < s; ++i) {
      if (pattern) pattern->push_back(p[i][i] > 0);
      out[i][o] = std::max(0.0, p[i][i]);
    }
  }
  return out;
}

inline std::vector<Mat> channels(const qpath::MovingState& st) {
  std::vector<Mat> in(3, zeros(st.size()));
  for (int c = 0; c < 3; ++c) {
    for (const auto& e : st.channel(c)) {
      in[c][e.i][e.j] = e.value;
      in[c][e.j][e.i] = e.value;
    }
  }
  return in;
}

struct Forward {
  std::vector<double> flat;    // node features, index i * width + o (padding zero)
  std::vector<double> pre1;    // fc1 pre-activation
  std::vector<double> out;
  std::vector<std::uint8_t> pattern;
};

inline Forward forward(const qpath::QNetwork& net, const qpath::MovingState& st) {
  Forward f;
  const auto h1 = e2e(channels(st), net.e2e1, &f.pattern);
  const auto h2 = e2e(h1, net.e2e2, &f.pattern);
  const Mat nodes = e2n(h2, net.e2n, &f.pattern);
  const int width = net.e2n.channels;
  f.flat.assign(static_cast<std::size_t>(net.m()) * width, 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int o = 0; o < width; ++o) f.flat[i * width + o] = nodes[i][o];
  }
  f.pre1.assign(net.fc1.out, 0.0);
  for (int r = 0; r < net.fc1.out; ++r) {
    double acc = net.fc1.b[r];
    for (int c = 0; c < net.fc1.in; ++c) acc += net.fc1.w[r * net.fc1.in + c] * f.flat[c];
    f.pre1[r] = acc;
    f.pattern.push_back(acc > 0);
  }
  f.out.assign(net.fc2.out, 0.0);
  for (int j = 0; j < net.fc2.out; ++j) {
    double acc = net.fc2.b[j];
    for (int r = 0; r < net.fc2.in; ++r) acc += net.fc2.w[j * net.fc2.in + r] * std::max(0.0, f.pre1[r]);
    f.out[j] = acc;
  }
  return f;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Random symmetric state with entries in (0, 1] on a fraction of pairs.
inline qpath::MovingState random_state(int m, int size, double density, qpath::Rng& rng) {
  qpath::MovingState st(m, size);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < size; ++i) {
      for (int j = i + 1; j < size; ++j) {
        if (rng.uniform() < density) st.channel(c).push_back({i, j, rng.uniform(0.05, 1.0)});
      }
    }
  }
  return st;
}

struct GradCheck {
  int checked = 0;
  int skipped = 0;
  int failed = 0;
  double worst = 0.0;
};

// Compares analytic gradients of L = c . Q against central differences.
// Parameters whose perturbation flips any rectifier are skipped.
inline GradCheck check_gradients(qpath::QNetwork net, const qpath::MovingState& st,
                                 const std::vector<double>& c, double tol, double h = 1e-3) {
  qpath::ForwardCache cache;
  qpath::q_forward(net, st, cache);
  qpath::GradientSet grads(net.shape());
  Eigen::VectorXd d_out(net.m());
  for (int j = 0; j < net.m(); ++j) d_out[j] = c[j];
  qpath::q_backward(net, cache, d_out, grads);

  GradCheck res;
  const Forward base = forward(net, st);
  auto judge = [&](double analytic, double numeric) {
    const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    res.worst = std::max(res.worst, err);
    ++res.checked;
    if (err >= tol) ++res.failed;
  };

  // Parameters upstream of fc1: full re-evaluation.
  auto full = [&](std::vector<double>& p, const std::vector<double>& g) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double keep = p[k];
      p[k] = keep + h;
      const Forward plus = forward(net, st);
      p[k] = keep - h;
      const Forward minus = forward(net, st);
      p[k] = keep;
      if (plus.pattern != base.pattern || minus.pattern != base.pattern) {
        ++res.skipped;
        continue;
      }
      judge(g[k], (dot(c, plus.out) - dot(c, minus.out)) / (2 * h));
    }
  };
  full(net.e2e1.w, grads.g.e2e1.w);
  full(net.e2e1.b, grads.g.e2e1.b);
  full(net.e2e2.w, grads.g.e2e2.w);
  full(net.e2e2.b, grads.g.e2e2.b);
  full(net.e2n.w, grads.g.e2n.w);
  full(net.e2n.b, grads.g.e2n.b);

  // fc1 weight (r, k) moves only hidden unit r; evaluate that change exactly.
  const int in = net.fc1.in;
  auto loss_with_hidden = [&](int r, double pre) {
    double l = 0;
    for (int j = 0; j < net.m(); ++j) {
      double q = base.out[j] + net.fc2.w[j * net.fc2.in + r] * (std::max(0.0, pre) - std::max(0.0, base.pre1[r]));
      l += c[j] * q;
    }
    return l;
  };
  for (int r = 0; r < net.fc1.out; ++r) {
    for (int k = 0; k <= in; ++k) {
      const double x = k < in ? base.flat[k] : 1.0;  // k == in is the bias
      const double pp = base.pre1[r] + h * x;
      const double pm = base.pre1[r] - h * x;
      if ((pp > 0) != (base.pre1[r] > 0) || (pm > 0) != (base.pre1[r] > 0)) {
        ++res.skipped;
        continue;
      }
      const double g = k < in ? grads.g.fc1.w[r * in + k] : grads.g.fc1.b[r];
      judge(g, (loss_with_hidden(r, pp) - loss_with_hidden(r, pm)) / (2 * h));
    }
  }
  // fc2 is linear: output j moves by +-h * hidden_r.
  for (int j = 0; j < net.m(); ++j) {
    for (int r = 0; r <= net.fc2.in; ++r) {
      const double x = r < net.fc2.in ? std::max(0.0, base.pre1[r]) : 1.0;
      const double lp = dot(c, base.out) + c[j] * h * x;
      const double lm = dot(c, base.out) - c[j] * h * x;
      const double g = r < net.fc2.in ? grads.g.fc2.w[j * net.fc2.in + r] : grads.g.fc2.b[j];
      judge(g, (lp - lm) / (2 * h));
    }
  }
  return res;
}

}  // namespace oracle
