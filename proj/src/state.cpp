#include "qpath/state.hpp"

#include "qpath/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace qpath {

namespace {

// Deterministic sign: point the normal towards +z, else +y, else +x.
Vec3 orient(Vec3 n) {
  for (int axis : {2, 1, 0}) {
    if (std::abs(n[axis]) > 1e-12) return n[axis] < 0 ? Vec3(-n) : n;
  }
  return n;
}

Vec3 fit_normal(const Graph& graph, const Lsg& lsg) {
  if (lsg.size() < 3) return Vec3::UnitZ();
  Vec3 mean = Vec3::Zero();
  for (NodeId v : lsg.nodes) mean += graph.position(v);
  mean /= lsg.size();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (NodeId v : lsg.nodes) {
    const Vec3 d = graph.position(v) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d ev = eig.eigenvalues();
  // A line-like neighbourhood has no meaningful plane; keep the default.
  if (ev[1] <= 1e-12 * std::max(ev[2], 1e-300)) return Vec3::UnitZ();
  return orient(eig.eigenvectors().col(0).normalized());
}

// Component of `dir` orthogonal to `n`, or nothing if it vanishes.
std::optional<Vec3> in_plane(const Vec3& dir, const Vec3& n) {
  Vec3 d = dir - dir.dot(n) * n;
  if (d.norm() <= 1e-9 * std::max(dir.norm(), 1e-300)) return std::nullopt;
  return d.normalized();
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace

Embedding2D embed_lsg(const Graph& graph, const Lsg& lsg, std::optional<NodeId> v_q) {
  if (!lsg.contains(lsg.center)) throw ArgumentError("embed_lsg: center missing from LSG");
  if (v_q && !lsg.contains(*v_q)) throw ArgumentError("embed_lsg: v_q outside the LSG");
  if (v_q && !graph.find_edge(*v_q, lsg.center)) {
    throw ArgumentError("embed_lsg: v_q is not adjacent to the center");
  }

  const Vec3 c = graph.position(lsg.center);
  Vec3 n = fit_normal(graph, lsg);

  // ex points from v_q to v_c, so v_q lands on the negative x axis.
  Vec3 ex;
  double scale;
  if (v_q) {
    const Vec3 d = c - graph.position(*v_q);
    scale = d.norm();
    ex = d / scale;
    // Tilt the plane so it contains the pinned edge.
    auto nn = in_plane(n, ex);
    if (!nn) {
      for (const Vec3& alt : {Vec3(Vec3::UnitZ()), Vec3(Vec3::UnitY()), Vec3(Vec3::UnitX())}) {
        if ((nn = in_plane(alt, ex))) break;
      }
    }
    n = *nn;
  } else {
    std::optional<Vec3> d;
    for (const Vec3& alt : {Vec3(Vec3::UnitX()), Vec3(Vec3::UnitY()), Vec3(Vec3::UnitZ())}) {
      if ((d = in_plane(alt, n))) break;
    }
    ex = *d;
    scale = graph.mean_edge_length() > 0 ? graph.mean_edge_length() : 1.0;
  }
  const Vec3 ey = n.cross(ex);

  Embedding2D emb;
  emb.coords.resize(lsg.size());
  for (int k = 0; k < lsg.size(); ++k) {
    const NodeId v = lsg.nodes[k];
    if (v == lsg.center) {
      emb.coords[k] = Eigen::Vector2d::Zero();
    } else if (v_q && v == *v_q) {
      emb.coords[k] = Eigen::Vector2d(-1.0, 0.0);
    } else {
      const Vec3 d = graph.position(v) - c;
      emb.coords[k] = Eigen::Vector2d(d.dot(ex) / scale, d.dot(ey) / scale);
    }
  }
  return emb;
}

NodeOrdering order_nodes(const Lsg& lsg, const Embedding2D& emb, int m) {
  if (lsg.size() > m) {
    throw StateOverflow("LSG with " + std::to_string(lsg.size()) + " nodes exceeds m = " +
                        std::to_string(m));
  }
  std::vector<std::tuple<double, double, NodeId, int>> keys;
  keys.reserve(lsg.size());
  for (int k = 0; k < lsg.size(); ++k) {
    const auto& p = emb.coords[k];
    if (!p.allFinite()) throw ArgumentError("order_nodes: non-finite embedding");
    keys.emplace_back(round6(p.x()), round6(p.y()), lsg.nodes[k], k);
  }
  std::sort(keys.begin(), keys.end());
  NodeOrdering ord;
  ord.m = m;
  ord.rank.resize(lsg.size());
  ord.node_at.resize(lsg.size());
  for (int r = 0; r < lsg.size(); ++r) {
    ord.rank[std::get<3>(keys[r])] = r;
    ord.node_at[r] = std::get<2>(keys[r]);
  }
  return ord;
}

NodeOrdering order_nodes_by_id(const Lsg& lsg, int m) {
  if (lsg.size() > m) {
    throw StateOverflow("LSG with " + std::to_string(lsg.size()) + " nodes exceeds m = " +
                        std::to_string(m));
  }
  NodeOrdering ord;
  ord.m = m;
  ord.rank.resize(lsg.size());
  ord.node_at.resize(lsg.size());
  for (int r = 0; r < lsg.size(); ++r) {
    const auto& [v, k] = lsg.lookup[r];
    ord.rank[k] = r;
    ord.node_at[r] = v;
  }
  return ord;
}

double MovingState::at(int c, int i, int j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  const auto& ch = channels_[c];
  const auto it = std::lower_bound(ch.begin(), ch.end(), std::make_pair(i, j),
                                   [](const Entry& e, const std::pair<int, int>& key) {
                                     return std::make_pair(e.i, e.j) < key;
                                   });
  if (it != ch.end() && it->i == i && it->j == j) return it->value;
  return 0.0;
}

Eigen::MatrixXd MovingState::dense(int c) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m_, m_);
  for (const Entry& e : channels_[c]) {
    out(e.i, e.j) = e.value;
    out(e.j, e.i) = e.value;
  }
  return out;
}

std::vector<int> MovingState::open_neighbors(int i) const {
  std::vector<int> out;
  for (const Entry& e : channels_[0]) {
    if (e.value <= 0.0) continue;
    if (e.i == i) out.push_back(e.j);
    if (e.j == i) out.push_back(e.i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool MovingState::operator==(const MovingState& other) const {
  if (m_ != other.m_ || size_ != other.size_) return false;
  for (int c = 0; c < 3; ++c) {
    const auto& a = channels_[c];
    const auto& b = other.channels_[c];
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].i != b[k].i || a[k].j != b[k].j || a[k].value != b[k].value) return false;
    }
  }
  return true;
}

EncodedLsg encode_lsg(const Graph& graph, Lsg lsg, std::optional<NodeId> v_q, int m,
                      OrderingKind kind) {
  EncodedLsg enc;
  if (kind == OrderingKind::kPattern) {
    enc.ordering = order_nodes(lsg, embed_lsg(graph, lsg, v_q), m);
  } else {
    enc.ordering = order_nodes_by_id(lsg, m);
  }
  double longest = 0.0;
  for (EdgeId e : lsg.edges) longest = std::max(longest, graph.edge(e).length);
  enc.max_length = longest > 0 ? longest : 1.0;
  enc.lsg = std::move(lsg);
  for (EdgeId e : enc.lsg.edges) {
    int i = enc.index_of(graph.edge(e).a);
    int j = enc.index_of(graph.edge(e).b);
    if (i > j) std::swap(i, j);
    enc.local_edges.push_back({i, j, e});
  }
  std::sort(enc.local_edges.begin(), enc.local_edges.end(),
            [](const auto& x, const auto& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
  return enc;
}

double edge_entry(const Graph& graph, const EncodedLsg& enc, const CoverageState& cov, EdgeId e) {
  return cov.edge_weight(graph, e) * graph.edge(e).length / enc.max_length;
}

namespace {

void set_entry(std::vector<MovingState::Entry>& ch, int i, int j, double value) {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(ch.begin(), ch.end(), std::make_pair(i, j),
                             [](const MovingState::Entry& e, const std::pair<int, int>& key) {
                               return std::make_pair(e.i, e.j) < key;
                             });
  const bool found = it != ch.end() && it->i == i && it->j == j;
  if (value == 0.0) {
    if (found) ch.erase(it);
  } else if (found) {
    it->value = value;
  } else {
    ch.insert(it, {i, j, value});
  }
}

// Restores the entry of a history step, if it is an LSG edge.
void restore_step(const Graph& graph, const EncodedLsg& enc, std::vector<MovingState::Entry>& ch,
                  NodeId from, NodeId to) {
  const int i = enc.index_of(from);
  const int j = enc.index_of(to);
  if (i < 0 || j < 0) return;
  const auto e = graph.find_edge(from, to);
  if (!e) return;
  set_entry(ch, i, j, graph.edge(*e).length / enc.max_length);
}

}  // namespace

MovingState build_state(const Graph& graph, const EncodedLsg& enc, const CoverageState& cov,
                        const std::vector<NodeId>& history) {
  MovingState s(enc.ordering.m, enc.ordering.size());
  auto& a = s.channel(0);
  for (const auto& le : enc.local_edges) {
    const double v = edge_entry(graph, enc, cov, le.edge);
    if (v > 0.0) a.push_back({le.i, le.j, v});
  }
  s.channel(1) = a;
  const std::size_t h = history.size();
  if (h >= 2) restore_step(graph, enc, s.channel(1), history[h - 2], history[h - 1]);
  s.channel(2) = s.channel(1);
  if (h >= 3) restore_step(graph, enc, s.channel(2), history[h - 3], history[h - 2]);
  return s;
}

MovingState advance_state(const MovingState& state, int r, int s) {
  if (state.at(0, r, s) == 0.0) {
    throw IllegalAction("advance_state: entry (" + std::to_string(r) + "," + std::to_string(s) +
                        ") is zero");
  }
  return advance_state(state, r, s, {{r, s, 0.0}});
}

MovingState advance_state(const MovingState& state, int r, int s,
                          const std::vector<MovingState::Entry>& updates) {
  if (state.at(0, r, s) == 0.0) {
    throw IllegalAction("advance_state: entry (" + std::to_string(r) + "," + std::to_string(s) +
                        ") is zero");
  }
  MovingState next(state.m(), state.size());
  next.channel(0) = state.channel(0);
  for (const auto& u : updates) set_entry(next.channel(0), u.i, u.j, u.value);
  next.channel(1) = state.channel(0);
  next.channel(2) = state.channel(1);
  return next;
}

double squared_distance(const MovingState& a, const MovingState& b) {
  if (a.m() != b.m()) throw ArgumentError("similarity: state dimensions differ");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto& x = a.channel(c);
    const auto& y = b.channel(c);
    std::size_t p = 0, q = 0;
    while (p < x.size() || q < y.size()) {
      double d;
      if (q == y.size() || (p < x.size() && std::tie(x[p].i, x[p].j) < std::tie(y[q].i, y[q].j))) {
        d = x[p++].value;
      } else if (p == x.size() || std::tie(y[q].i, y[q].j) < std::tie(x[p].i, x[p].j)) {
        d = y[q++].value;
      } else {
        d = x[p++].value - y[q++].value;
      }
      sum += 2.0 * d * d;
    }
  }
  return sum;
}

double similarity(const MovingState& a, const MovingState& b) {
  return (1.0 / kSimilarityLambda) / (1.0 + std::sqrt(squared_distance(a, b)));
}

}  // namespace qpath
