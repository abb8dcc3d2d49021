#include "doctest.h"

#include "qpath/collision.hpp"
#include "qpath/random.hpp"

#include <cmath>
#include <numbers>

using namespace qpath;

namespace {

Polytope box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int k = 0; k < 8; ++k) {
    v.emplace_back(k & 1 ? hi.x() : lo.x(), k & 2 ? hi.y() : lo.y(), k & 4 ? hi.z() : lo.z());
  }
  return Polytope(v);
}

HeadShape cube_head() {
  HeadShape h;
  for (const Vec3& p : box(Vec3(0, 0, 0), Vec3(1, 1, 1)).vertices) h.vertices.push_back(p);
  return h;
}

}  // namespace

TEST_CASE("swept volume of a translated cube") {
  const HeadShape head = cube_head();
  const Polytope still = swept_volume(Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3::UnitZ(), head);
  CHECK(still.vertices.size() == head.vertices.size());
  CHECK(still.lo == Vec3(1, 2, 3));
  CHECK(still.hi == Vec3(2, 3, 4));

  const Polytope moved = swept_volume(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3::UnitZ(), head);
  CHECK(moved.vertices.size() <= 2 * head.vertices.size());
  CHECK(moved.lo == Vec3(0, 0, 0));
  CHECK(moved.hi == Vec3(2, 1, 1));
  // The hull is the 2x1x1 box: a point inside it has zero distance.
  CHECK(polytope_distance(moved, Polytope({Vec3(1.5, 0.5, 0.5)})) == 0.0);
  CHECK(polytope_distance(moved, Polytope({Vec3(2.5, 0.5, 0.5)})) == doctest::Approx(0.5));
}

TEST_CASE("cube separation") {
  const Polytope a = box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const Polytope b = box(Vec3(1.001, 0, 0), Vec3(2.001, 1, 1));
  CHECK(polytope_distance(a, b) == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK_FALSE(polytopes_intersect(a, b));
  CHECK(polytopes_intersect(a, box(Vec3(1, 0, 0), Vec3(2, 1, 1))));
  CHECK(polytopes_intersect(a, box(Vec3(0.2, 0.2, 0.2), Vec3(0.4, 0.4, 0.4))));
  const Polytope diag = box(Vec3(2, 3, 1.5), Vec3(3, 4, 2));
  CHECK(polytope_distance(a, diag) == doctest::Approx(std::sqrt(1 + 4 + 0.25)).epsilon(1e-9));
}

TEST_CASE("distance is symmetric and bounded by vertex pairs") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vec3> pa, pb;
    const Vec3 off(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    for (int k = 0; k < 6; ++k) pa.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (int k = 0; k < 7; ++k) pb.push_back(off + Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const Polytope a(pa), b(pb);
    const double dab = polytope_distance(a, b);
    const double dba = polytope_distance(b, a);
    CHECK(std::abs(dab - dba) < 1e-9);
    CHECK(polytopes_intersect(a, b) == polytopes_intersect(b, a));
    double pair_min = 1e300;
    for (const Vec3& x : pa)
      for (const Vec3& y : pb) pair_min = std::min(pair_min, (x - y).norm());
    CHECK(dab <= pair_min + 1e-12);
  }
}

TEST_CASE("prism circumscribes its cylinder") {
  const Vec3 a(1, 2, 3), b(4, -1, 8);
  const double d = 1.0;
  const Polytope p = strut_prism(a, b, d);
  CHECK(p.vertices.size() == 16);
  const Vec3 axis = (b - a).normalized();
  const Vec3 u = axis.cross(Vec3::UnitX()).normalized();
  const Vec3 w = axis.cross(u);
  for (int k = 0; k < 64; ++k) {
    const double t = 2 * std::numbers::pi * k / 64;
    for (double s : {0.0, 0.3, 1.0}) {
      const Vec3 pt = a + s * (b - a) + 0.5 * d * (std::cos(t) * u + std::sin(t) * w);
      CHECK(polytope_distance(p, Polytope({pt})) <= 1e-9);
    }
  }
}

TEST_CASE("world queries and exclusion") {
  const Graph g({{0, 0, 0}, {10, 0, 0}, {5, 0, 0}, {5, 0, 20}}, {{0, 1}, {2, 3}});
  WorldObstacles world;
  const Polytope vol = swept_volume(g.position(0), g.position(1), Vec3::UnitZ(), HeadShape::frustum());
  CHECK_FALSE(intersects(world, vol, {}));
  world.add_strut(g, 1, 1.0);
  CHECK(intersects(world, vol, {}));
  CHECK_FALSE(intersects(world, vol, {1}));
  WorldObstacles copy = world;
  copy.add_strut(g, 0, 1.0);
  CHECK(copy.size() == 2);
  CHECK(world.size() == 1);
  copy.freeze();
  CHECK(copy.size() == 2);
}

TEST_CASE("hemisphere samples") {
  const auto s = hemisphere_samples(200);
  CHECK(s.size() == 200);
  for (const Vec3& q : s) {
    CHECK(std::abs(q.norm() - 1.0) < 1e-9);
    CHECK(q.z() > 0);
  }
  CHECK(hemisphere_samples(200) == s);
}

TEST_CASE("orientation search against brute force") {
  // A tall wall on the +x side of a short move near the origin.
  const Graph g({{0, 0, 0}, {1, 0, 0}, {6, -50, 0}, {6, 50, 0}}, {{0, 1}, {2, 3}});
  WorldObstacles world;
  world.add({-1, box(Vec3(6, -50, -1), Vec3(8, 50, 60))});
  const HeadShape head = HeadShape::frustum();
  const auto samples = hemisphere_samples(200);
  const Vec3 up = Vec3::UnitZ();

  const auto res = min_rotation_orientation(g, world, 0, 1, up, head, samples);
  REQUIRE(res.has_value());
  double best = 1e9;
  for (const Vec3& q : samples) {
    if (!intersects(world, swept_volume(g.position(0), g.position(1), q, head), {0})) {
      best = std::min(best, std::atan2(up.cross(q).norm(), up.dot(q)));
    }
  }
  CHECK(res->angle == doctest::Approx(best).epsilon(1e-12));
  CHECK(res->q.x() < 0);

  const auto out = collision_reward(g, world, 0, 1, up, head, HeadMode::kReorientable, samples);
  CHECK(out.reward == doctest::Approx(-best));
  CHECK_FALSE(out.collided);
  CHECK(collision_reward(g, world, 0, 1, up, head, HeadMode::kFixed, samples).reward == -1000.0);
  CHECK(collision_reward(g, world, 0, 1, res->q, head, HeadMode::kFixed, samples).reward == 0.0);
  CHECK(collision_reward(g, WorldObstacles{}, 0, 1, up, head, HeadMode::kFixed, samples, true).reward == -1000.0);
}

TEST_CASE("free and fully blocked moves") {
  const Graph g({{0, 0, 0}, {1, 0, 0}}, {{0, 1}});
  const HeadShape head = HeadShape::frustum();
  const auto samples = hemisphere_samples(200);
  WorldObstacles world;
  auto res = min_rotation_orientation(g, world, 0, 1, Vec3::UnitZ(), head, samples);
  REQUIRE(res.has_value());
  CHECK(res->angle == 0.0);
  CHECK(res->q == Vec3::UnitZ());
  CHECK(collision_reward(g, world, 0, 1, Vec3::UnitZ(), head, HeadMode::kFixed, samples).reward == 0.0);

  world.add({-1, box(Vec3(-100, -100, 0.2), Vec3(100, 100, 200))});
  CHECK_FALSE(min_rotation_orientation(g, world, 0, 1, Vec3::UnitZ(), head, samples).has_value());
  CHECK(collision_reward(g, world, 0, 1, Vec3::UnitZ(), head, HeadMode::kReorientable, samples).reward ==
        -1000.0);
}
