#include "doctest.h"

#include "qpath/errors.hpp"
#include "qpath/graph.hpp"

#include <cmath>
#include <set>

using namespace qpath;

namespace {

Graph path_graph(int n) {
  std::vector<Vec3> pos;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) pos.emplace_back(i, 0, 0);
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(pos, edges);
}

// Triangulated hexagonal patch: every interior node has valence 6.
Graph tri_patch(int radius) {
  std::vector<Vec3> pos;
  std::vector<std::pair<int, int>> idx;
  for (int q = -radius; q <= radius; ++q) {
    for (int r = -radius; r <= radius; ++r) {
      if (std::abs(q + r) > radius) continue;
      idx.emplace_back(q, r);
      pos.emplace_back(q + 0.5 * r, r * std::sqrt(3.0) / 2, 0);
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const int dq = idx[b].first - idx[a].first, dr = idx[b].second - idx[a].second;
      if ((std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) == 2) edges.emplace_back(a, b);
    }
  }
  return Graph(pos, edges);
}

}  // namespace

TEST_CASE("graph construction validates input") {
  const std::vector<Vec3> pos{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}};
  CHECK_THROWS_AS(Graph(pos, {{0, 3}}), ArgumentError);
  CHECK_THROWS_AS(Graph(pos, {{1, 1}}), ArgumentError);
  CHECK_THROWS_AS(Graph(pos, {{0, 1}, {1, 0}}), ArgumentError);
  CHECK_THROWS_AS(Graph({{0, 0, 0}, {0, 0, 0}}, {{0, 1}}), ArgumentError);
  CHECK_THROWS_AS(Graph({{0, 0, NAN}}, {}), ArgumentError);

  const Graph g(pos, {{2, 1}, {0, 1}});
  CHECK(g.edge(0).a == 1);
  CHECK(g.edge(0).b == 2);
  CHECK(g.edge(1).length == doctest::Approx(1.0));
  CHECK(g.degree(1) == 2);
  CHECK(g.neighbors(1)[0].neighbor == 0);
  CHECK(g.find_edge(2, 1).value() == 0);
  CHECK_FALSE(g.find_edge(0, 2).has_value());
  CHECK(g.component_count() == 1);
}

TEST_CASE("components are labelled in node order") {
  const Graph g({{0, 0, 0}, {1, 0, 0}, {5, 0, 0}, {6, 0, 0}, {9, 9, 9}}, {{0, 1}, {2, 3}});
  CHECK(g.component_count() == 3);
  CHECK(g.components() == std::vector<int>{0, 0, 1, 1, 2});
}

TEST_CASE("lsg of a path graph") {
  const Graph g = path_graph(7);
  const Lsg lsg = extract_lsg(g, 3, 3);
  CHECK(lsg.size() == 7);
  CHECK(lsg.edges.size() == 6);
  CHECK(lsg.nodes[0] == 3);
  CHECK(lsg.ring_of(0) == 3);
  CHECK(lsg.ring_of(4) == 1);

  const Lsg two = extract_lsg(g, 3, 2);
  CHECK(two.size() == 5);
  CHECK(two.edges.size() == 4);
  CHECK_FALSE(two.contains(0));
}

TEST_CASE("zero rings gives the center alone") {
  const Graph g = tri_patch(2);
  const Lsg lsg = extract_lsg(g, 5, 0);
  CHECK(lsg.size() == 1);
  CHECK(lsg.edges.empty());
  CHECK_THROWS_AS(extract_lsg(g, 99, 1), ArgumentError);
}

TEST_CASE("lsg size bounds on a valence-6 patch") {
  const Graph g = tri_patch(8);
  const int center = (g.node_count() - 1) / 2;  // origin sits in the middle
  CHECK(g.degree(center) == 6);
  for (int n = 0; n <= 6; ++n) {
    const Lsg lsg = extract_lsg(g, center, n);
    CHECK(lsg.size() <= 1 + 3 * n * (n + 1));
    if (n == 2) CHECK(lsg.size() <= 19);
  }
}

TEST_CASE("lsg properties on random graphs") {
  std::uint64_t state = 12345;
  auto next = [&state] { state = state * 6364136223846793005ULL + 1442695040888963407ULL; return state >> 33; };
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 10 + static_cast<int>(next() % 30);
    std::vector<Vec3> pos;
    for (int i = 0; i < n; ++i) pos.emplace_back(next() % 1000, next() % 1000, i);
    std::set<std::pair<int, int>> es;
    for (int k = 0; k < 2 * n; ++k) {
      int a = next() % n, b = next() % n;
      if (a != b) es.emplace(std::min(a, b), std::max(a, b));
    }
    const Graph g(pos, {es.begin(), es.end()});
    const int k = std::max(g.max_degree(), 3);
    const int center = static_cast<int>(next() % n);
    for (int r = 0; r < 4; ++r) {
      const Lsg small = extract_lsg(g, center, r);
      const Lsg big = extract_lsg(g, center, r + 1);
      for (NodeId v : small.nodes) CHECK(big.contains(v));
      const double bound = 1.0 + k * (std::pow(k - 1, r) - 1) / (k - 2);
      CHECK(small.size() <= bound + 1e-9);
      // Excluded edges are exactly those leaving the node set.
      int inside = 0;
      for (int e = 0; e < g.edge_count(); ++e) {
        inside += small.contains(g.edge(e).a) && small.contains(g.edge(e).b);
      }
      CHECK(inside == static_cast<int>(small.edges.size()));
      for (EdgeId e : small.edges) {
        CHECK(small.contains(g.edge(e).a));
        CHECK(small.contains(g.edge(e).b));
      }
      // Ring index equals hop distance: neighbours differ by at most one ring.
      for (EdgeId e : small.edges) {
        CHECK(std::abs(small.ring_of(g.edge(e).a) - small.ring_of(g.edge(e).b)) <= 1);
      }
    }
  }
}

TEST_CASE("coverage caps per mode") {
  const Graph g = path_graph(3);
  CoverageState wf(g, CoverageMode::kWireframe);
  wf.visit_edge(0);
  CHECK_THROWS_AS(wf.visit_edge(0), CoverageViolation);
  CHECK(wf.edge_visits(0) == 1);
  try {
    wf.visit_edge(0);
  } catch (const CoverageViolation& v) {
    CHECK(v.entity() == CoverageViolation::Entity::kEdge);
    CHECK(v.id() == 0);
  }

  CoverageState ccf(g, CoverageMode::kCcf);
  ccf = coverage_apply(ccf, {CoverageMove::Kind::kEdge, 1});
  ccf = coverage_apply(ccf, {CoverageMove::Kind::kEdge, 1});
  CHECK(ccf.edge_visits(1) == 2);
  CHECK_THROWS_AS(coverage_apply(ccf, {CoverageMove::Kind::kEdge, 1}), CoverageViolation);

  CoverageState metal(g, CoverageMode::kMetal);
  metal.visit_node(2);
  CHECK_THROWS_AS(metal.visit_node(2), CoverageViolation);
}

TEST_CASE("coverage completion") {
  const Graph g = path_graph(3);
  CoverageState wf(g, CoverageMode::kWireframe);
  CHECK_FALSE(coverage_complete(wf, g));
  wf.visit_edge(0);
  wf.visit_edge(1);
  CHECK(coverage_complete(wf, g));

  CoverageState metal(g, CoverageMode::kMetal);
  metal.visit_node(0);
  metal.visit_node(1);
  CHECK_FALSE(coverage_complete(metal, g));
  CHECK(metal.unvisited_nodes() == std::vector<int>{2});
}

TEST_CASE("edge weights follow remaining capacity") {
  const Graph g = path_graph(3);
  CoverageState ccf(g, CoverageMode::kCcf);
  CHECK(ccf.edge_weight(g, 0) == 1.0);
  ccf.visit_edge(0);
  CHECK(ccf.edge_weight(g, 0) == 0.5);
  ccf.visit_edge(0);
  CHECK(ccf.edge_weight(g, 0) == 0.0);

  CoverageState metal(g, CoverageMode::kMetal);
  metal.visit_node(0);
  CHECK(metal.edge_open(g, 0));
  metal.visit_node(1);
  CHECK_FALSE(metal.edge_open(g, 0));
  CHECK(metal.edge_open(g, 1));
}

TEST_CASE("toolpath totals and continuity") {
  const Graph g({{0, 0, 0}, {1, 0, 0}, {5, 0, 0}, {6, 0, 0}}, {{0, 1}, {2, 3}});
  Toolpath p;
  p.steps = {{0, true}, {1, false}, {2, true}, {3, false}};
  CHECK(p.total_length(g) == doctest::Approx(2.0));
  CHECK(p.jump_length(g) == doctest::Approx(4.0));
  CHECK(p.jump_count() == 1);
  CHECK_NOTHROW(p.check_continuity(g));
  p.steps[2].is_jump = false;
  CHECK_THROWS_AS(p.check_continuity(g), ArgumentError);
}
