#include "doctest.h"

#include "meshes.hpp"
#include "qpath/errors.hpp"
#include "qpath/state.hpp"

#include <cmath>

using namespace qpath;

namespace {

Graph star4() {
  return Graph({{0, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}},
               {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
}

}  // namespace

TEST_CASE("embedding pins a single edge") {
  const Graph g({{3, 4, 0}, {5, 4, 1}}, {{0, 1}});
  const Lsg lsg = extract_lsg(g, 1, 1);
  const Embedding2D emb = embed_lsg(g, lsg, 0);
  CHECK(emb.coords[lsg.local_index(1)] == Eigen::Vector2d(0, 0));
  CHECK(emb.coords[lsg.local_index(0)] == Eigen::Vector2d(-1, 0));
}

TEST_CASE("embedding of a symmetric star is mirror symmetric") {
  const Graph g = star4();
  const Lsg lsg = extract_lsg(g, 0, 1);
  const Embedding2D emb = embed_lsg(g, lsg, 1);
  const auto up = emb.coords[lsg.local_index(3)];
  const auto down = emb.coords[lsg.local_index(4)];
  CHECK(std::abs(up.x() - down.x()) < 1e-9);
  CHECK(std::abs(up.y() + down.y()) < 1e-9);
  CHECK(std::abs(up.y()) == doctest::Approx(1.0));
  const auto right = emb.coords[lsg.local_index(2)];
  CHECK(right.x() == doctest::Approx(1.0));
  CHECK(std::abs(right.y()) < 1e-9);
}

TEST_CASE("embedding is deterministic and pins survive 3D input") {
  const Graph g = meshes::tri_patch(4, 0.2, 7);
  const Lsg lsg = extract_lsg(g, 30, 3);
  const NodeId q = g.neighbors(30)[0].neighbor;
  const Embedding2D a = embed_lsg(g, lsg, q);
  const Embedding2D b = embed_lsg(g, lsg, q);
  for (int k = 0; k < lsg.size(); ++k) CHECK(a.coords[k] == b.coords[k]);
  CHECK(a.coords[lsg.local_index(q)] == Eigen::Vector2d(-1, 0));

  const Embedding2D free = embed_lsg(g, lsg, std::nullopt);
  CHECK(free.coords[0] == Eigen::Vector2d(0, 0));
  for (const auto& p : free.coords) CHECK(p.allFinite());
  CHECK_THROWS_AS(embed_lsg(g, lsg, 0), ArgumentError);
}

TEST_CASE("vertical pinned edge still embeds") {
  const Graph g({{0, 0, 0}, {0, 0, 1}, {1, 0, 1}, {0, 1, 1}}, {{0, 1}, {1, 2}, {1, 3}});
  const Lsg lsg = extract_lsg(g, 1, 1);
  const Embedding2D emb = embed_lsg(g, lsg, 0);
  for (const auto& p : emb.coords) CHECK(p.allFinite());
  CHECK(emb.coords[lsg.local_index(0)] == Eigen::Vector2d(-1, 0));
}

TEST_CASE("ordering ranks by x then y then id") {
  const Graph g({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1}, {1, 2}});
  const Lsg lsg = extract_lsg(g, 1, 1);
  Embedding2D emb;
  emb.coords.resize(3);
  emb.coords[lsg.local_index(0)] = {-1, 0};
  emb.coords[lsg.local_index(1)] = {0, 0};
  emb.coords[lsg.local_index(2)] = {1, 0};
  NodeOrdering ord = order_nodes(lsg, emb, 10);
  CHECK(ord.node_at == std::vector<NodeId>{0, 1, 2});

  emb.coords[lsg.local_index(0)] = {0, 1};
  emb.coords[lsg.local_index(2)] = {0, -1};
  ord = order_nodes(lsg, emb, 10);
  CHECK(ord.node_at == std::vector<NodeId>{2, 1, 0});

  emb.coords[lsg.local_index(0)] = {0, 0};
  emb.coords[lsg.local_index(2)] = {0, 0};
  ord = order_nodes(lsg, emb, 10);
  CHECK(ord.node_at == std::vector<NodeId>{0, 1, 2});

  CHECK_THROWS_AS(order_nodes(lsg, emb, 2), StateOverflow);
}

TEST_CASE("six rings of a valence-6 mesh fit into m = 300") {
  const Graph g = meshes::tri_patch(8);
  const NodeId c = (g.node_count() - 1) / 2;
  const Lsg lsg = extract_lsg(g, c, 6);
  CHECK(lsg.size() == 127);
  CHECK_NOTHROW(encode_lsg(g, lsg, std::nullopt, 300));
}

TEST_CASE("build_state channels") {
  const Graph g({{0, 0, 0}, {2, 0, 0}, {3, 0, 0}}, {{0, 1}, {1, 2}});
  CoverageState cov(g, CoverageMode::kWireframe);
  const EncodedLsg enc = encode_lsg(g, extract_lsg(g, 1, 1), std::nullopt, 50);
  MovingState s = build_state(g, enc, cov, {1});
  const int i0 = enc.index_of(0), i1 = enc.index_of(1), i2 = enc.index_of(2);
  CHECK(s.at(0, i0, i1) == 1.0);
  CHECK(s.at(0, i1, i2) == 0.5);
  CHECK(s.channel(0).size() == s.channel(1).size());
  CHECK(s == MovingState(s));
  for (int c = 1; c < 3; ++c) {
    for (std::size_t k = 0; k < s.channel(0).size(); ++k) {
      CHECK(s.channel(c)[k].value == s.channel(0)[k].value);
    }
  }

  cov.visit_edge(0);
  s = build_state(g, enc, cov, {0, 1});
  CHECK(s.at(0, i0, i1) == 0.0);
  CHECK(s.at(1, i0, i1) == 1.0);
  CHECK(s.at(2, i0, i1) == 1.0);
  const Eigen::MatrixXd d = s.dense(1);
  CHECK((d - d.transpose()).norm() == 0.0);
  CHECK(d.rows() == 50);
}

TEST_CASE("advance_state shifts channels") {
  const Graph g({{0, 0, 0}, {1, 0, 0}}, {{0, 1}});
  CoverageState cov(g, CoverageMode::kWireframe);
  const EncodedLsg enc = encode_lsg(g, extract_lsg(g, 0, 1), std::nullopt, 50);
  const MovingState s = build_state(g, enc, cov, {0});
  const MovingState t = advance_state(s, enc.index_of(0), enc.index_of(1));
  CHECK(t.channel(0).empty());
  CHECK(t.at(1, 0, 1) == s.at(0, 0, 1));
  CHECK(t.channel(2).size() == s.channel(1).size());
  CHECK_THROWS_AS(advance_state(t, 0, 1), IllegalAction);
}

TEST_CASE("advancing matches rebuilding along wireframe walks") {
  const Graph g = meshes::tri_patch(5, 0.15, 3);
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const NodeId c = rng.below(g.node_count());
    const EncodedLsg enc = encode_lsg(g, extract_lsg(g, c, 3), std::nullopt, 150);
    CoverageState cov(g, CoverageMode::kWireframe);
    std::vector<NodeId> path{c};
    MovingState s = build_state(g, enc, cov, path);
    for (int step = 0; step < 6; ++step) {
      const NodeId cur = path.back();
      std::vector<NodeId> options;
      for (const auto& inc : g.neighbors(cur)) {
        if (enc.lsg.contains(inc.neighbor) && cov.edge_open(g, inc.edge)) options.push_back(inc.neighbor);
      }
      if (options.empty()) break;
      const NodeId nxt = options[rng.below(static_cast<int>(options.size()))];
      s = advance_state(s, enc.index_of(cur), enc.index_of(nxt));
      cov.visit_edge(*g.find_edge(cur, nxt));
      path.push_back(nxt);
      CHECK(s == build_state(g, enc, cov, path));
    }
  }
}

TEST_CASE("similarity values") {
  const Graph g = meshes::tri_patch(2);
  CoverageState cov(g, CoverageMode::kWireframe);
  const EncodedLsg enc = encode_lsg(g, extract_lsg(g, 9, 2), std::nullopt, 100);
  const MovingState s = build_state(g, enc, cov, {9});
  CHECK(similarity(s, s) == doctest::Approx(1.0 / 0.76).epsilon(1e-15));

  MovingState a(10, 3), b(10, 3);
  for (int c = 0; c < 3; ++c) {
    a.channel(c).push_back({0, 1, 0.5});
    b.channel(c).push_back({0, 1, 1.0});
  }
  CHECK(std::sqrt(squared_distance(a, b)) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
  CHECK(similarity(a, b) == doctest::Approx(0.5915).epsilon(1e-4));

  MovingState c2 = b;
  c2.channel(0)[0].value = 2.0;
  CHECK(similarity(a, c2) < similarity(a, b));
  CHECK_THROWS_AS(similarity(a, MovingState(11, 3)), ArgumentError);
}

TEST_CASE("states of LSGs differing by one edge are closer than unrelated ones") {
  const Graph g = meshes::tri_patch(7, 0.2, 5);
  Rng rng(2);
  double near_sum = 0, far_sum = 0;
  int near_n = 0, far_n = 0;
  std::vector<MovingState> states;
  for (int t = 0; t < 40; ++t) {
    const NodeId c = rng.below(g.node_count());
    const EncodedLsg enc = encode_lsg(g, extract_lsg(g, c, 2), std::nullopt, 100);
    CoverageState cov(g, CoverageMode::kWireframe);
    const MovingState s = build_state(g, enc, cov, {c});
    cov.visit_edge(enc.lsg.edges[rng.below(static_cast<int>(enc.lsg.edges.size()))]);
    near_sum += similarity(s, build_state(g, enc, cov, {c}));
    ++near_n;
    for (const auto& other : states) {
      far_sum += similarity(s, other);
      ++far_n;
    }
    states.push_back(s);
  }
  CHECK(near_sum / near_n > far_sum / far_n);
}
