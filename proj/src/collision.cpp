#include "qpath/collision.hpp"

#include "qpath/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace qpath {

Polytope::Polytope(std::vector<Vec3> verts) : vertices(std::move(verts)) {
  if (vertices.empty()) throw ArgumentError("polytope needs at least one vertex");
  lo = hi = vertices[0];
  for (const Vec3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

Vec3 Polytope::support(const Vec3& dir) const {
  std::size_t best = 0;
  double bd = vertices[0].dot(dir);
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    const double d = vertices[k].dot(dir);
    if (d > bd) {
      bd = d;
      best = k;
    }
  }
  return vertices[best];
}

HeadShape HeadShape::frustum(double tip_radius, double top_radius, double height, int sides) {
  if (!(tip_radius > 0 && top_radius > 0 && height > 0) || sides < 3) {
    throw ConfigError("head frustum dimensions must be positive with at least 3 sides");
  }
  HeadShape h;
  for (double z : {0.0, height}) {
    const double r = z == 0.0 ? tip_radius : top_radius;
    for (int k = 0; k < sides; ++k) {
      const double a = 2 * std::numbers::pi * k / sides;
      h.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  }
  return h;
}

Polytope place_head(const HeadShape& head, const Vec3& tip, const Vec3& q) {
  const Eigen::Matrix3d r =
      Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), q.normalized()).toRotationMatrix();
  std::vector<Vec3> v;
  v.reserve(head.vertices.size());
  for (const Vec3& p : head.vertices) v.push_back(tip + r * p);
  return Polytope(std::move(v));
}

Polytope swept_volume(const Vec3& v_a, const Vec3& v_b, const Vec3& q, const HeadShape& head) {
  Polytope at_a = place_head(head, v_a, q);
  if ((v_b - v_a).norm() == 0.0) return at_a;
  std::vector<Vec3> v = std::move(at_a.vertices);
  const Vec3 shift = v_b - v_a;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) v.push_back(v[k] + shift);
  return Polytope(std::move(v));
}

Polytope strut_prism(const Vec3& a, const Vec3& b, double diameter, int sides) {
  const Vec3 axis = (b - a).normalized();
  Vec3 ref = std::abs(axis.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = axis.cross(ref).normalized();
  const Vec3 w = axis.cross(u);
  const double r = 0.5 * diameter / std::cos(std::numbers::pi / sides);
  std::vector<Vec3> v;
  for (const Vec3& end : {a, b}) {
    for (int k = 0; k < sides; ++k) {
      const double t = 2 * std::numbers::pi * k / sides;
      v.push_back(end + r * (std::cos(t) * u + std::sin(t) * w));
    }
  }
  return Polytope(std::move(v));
}

namespace {

// Closest point to the origin on the hull of a simplex of up to 4 points.
// Keeps only the points of the supporting face.
Vec3 reduce_simplex(std::vector<Vec3>& simplex) {
  const int n = static_cast<int>(simplex.size());
  double best_norm = std::numeric_limits<double>::infinity();
  Vec3 best = simplex[0];
  int best_mask = 1;
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<int> idx;
    for (int k = 0; k < n; ++k) {
      if (mask & (1 << k)) idx.push_back(k);
    }
    const int r = static_cast<int>(idx.size());
    Vec3 p;
    if (r == 1) {
      p = simplex[idx[0]];
    } else {
      const Vec3& s0 = simplex[idx[0]];
      Eigen::MatrixXd d(3, r - 1);
      for (int k = 1; k < r; ++k) d.col(k - 1) = simplex[idx[k]] - s0;
      const Eigen::MatrixXd gram = d.transpose() * d;
      const Eigen::VectorXd rhs = -d.transpose() * s0;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      if (ldlt.info() != Eigen::Success || std::abs(gram.determinant()) < 1e-18 * std::pow(gram.trace() + 1e-300, r - 1)) {
        continue;
      }
      const Eigen::VectorXd mu = ldlt.solve(rhs);
      if ((mu.array() <= 0.0).any() || mu.sum() >= 1.0) continue;
      p = s0 + d * mu;
    }
    const double nrm = p.norm();
    if (nrm < best_norm) {
      best_norm = nrm;
      best = p;
      best_mask = mask;
    }
  }
  std::vector<Vec3> kept;
  for (int k = 0; k < n; ++k) {
    if (best_mask & (1 << k)) kept.push_back(simplex[k]);
  }
  simplex = std::move(kept);
  return best;
}

// GJK distance. Returns early with a lower bound once it exceeds stop_above.
double gjk(const Polytope& a, const Polytope& b, double stop_above) {
  Vec3 v = a.vertices[0] - b.vertices[0];
  std::vector<Vec3> simplex;
  double last = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 128; ++iter) {
    const double vn = v.norm();
    if (vn <= 1e-12) return 0.0;
    const Vec3 w = a.support(-v) - b.support(v);
    const double vw = v.dot(w);
    if (vw > 0 && vw / vn > stop_above) return vw / vn;
    if (vn * vn - vw <= 1e-12 * vn * vn + 1e-20) return vn;
    if (std::any_of(simplex.begin(), simplex.end(), [&w](const Vec3& s) { return (s - w).norm() < 1e-14; })) {
      return vn;
    }
    simplex.push_back(w);
    v = reduce_simplex(simplex);
    if (simplex.size() == 4) return 0.0;  // origin enclosed
    const double nn = v.norm();
    if (nn >= last) return std::min(nn, last);
    last = nn;
  }
  return v.norm();
}

bool boxes_overlap(const Polytope& a, const Polytope& b, double tol) {
  return (a.lo.array() <= b.hi.array() + tol).all() && (b.lo.array() <= a.hi.array() + tol).all();
}

}  // namespace

double polytope_distance(const Polytope& a, const Polytope& b) {
  return gjk(a, b, std::numeric_limits<double>::infinity());
}

bool polytopes_intersect(const Polytope& a, const Polytope& b, double tol) {
  if (!boxes_overlap(a, b, tol)) return false;
  return gjk(a, b, tol) <= tol;
}

void WorldObstacles::add_strut(const Graph& graph, EdgeId e, double diameter) {
  const Edge& ed = graph.edge(e);
  add({e, strut_prism(graph.position(ed.a), graph.position(ed.b), diameter)});
}

void WorldObstacles::freeze() {
  if (extra_.empty()) return;
  auto merged = std::make_shared<std::vector<Obstacle>>(*base_);
  for (Obstacle& o : extra_) merged->push_back(std::move(o));
  extra_.clear();
  base_ = std::move(merged);
}

bool intersects(const WorldObstacles& world, const Polytope& vol, const std::vector<EdgeId>& exclude,
                double tol) {
  bool hit = false;
  world.for_each([&](const Obstacle& o) {
    if (hit) return;
    if (o.strut >= 0 && std::binary_search(exclude.begin(), exclude.end(), o.strut)) return;
    hit = polytopes_intersect(o.shape, vol, tol);
  });
  return hit;
}

std::vector<Vec3> hemisphere_samples(int count) {
  std::vector<Vec3> out;
  out.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (k + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

std::vector<EdgeId> incident_struts(const Graph& graph, NodeId v_a, NodeId v_b) {
  std::vector<EdgeId> out;
  for (NodeId v : {v_a, v_b}) {
    for (const Incidence& inc : graph.neighbors(v)) out.push_back(inc.edge);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::optional<OrientationResult> min_rotation_orientation(const Graph& graph,
                                                          const WorldObstacles& world, NodeId v_a,
                                                          NodeId v_b, const Vec3& q_a,
                                                          const HeadShape& head,
                                                          const std::vector<Vec3>& samples) {
  const Vec3& pa = graph.position(v_a);
  const Vec3& pb = graph.position(v_b);
  const auto exclude = incident_struts(graph, v_a, v_b);
  if (!intersects(world, swept_volume(pa, pb, q_a, head), exclude)) return OrientationResult{q_a, 0.0};

  std::vector<std::pair<double, int>> order;
  order.reserve(samples.size());
  for (int k = 0; k < static_cast<int>(samples.size()); ++k) {
    order.emplace_back(angle_between(q_a, samples[k]), k);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [angle, k] : order) {
    if (!intersects(world, swept_volume(pa, pb, samples[k], head), exclude)) {
      return OrientationResult{samples[k], angle};
    }
  }
  return std::nullopt;
}

CollisionOutcome collision_reward(const Graph& graph, const WorldObstacles& world, NodeId v_a,
                                  NodeId v_b, const Vec3& q_a, const HeadShape& head, HeadMode mode,
                                  const std::vector<Vec3>& samples, bool earlier_collision) {
  CollisionOutcome out;
  out.q_b = q_a;
  if (earlier_collision) {
    out.reward = kCollisionPenalty;
    out.collided = true;
    return out;
  }
  if (mode == HeadMode::kFixed) {
    const auto exclude = incident_struts(graph, v_a, v_b);
    const bool hit = intersects(world, swept_volume(graph.position(v_a), graph.position(v_b), q_a, head),
                                exclude);
    out.reward = hit ? kCollisionPenalty : 0.0;
    out.collided = hit;
    return out;
  }
  const auto found = min_rotation_orientation(graph, world, v_a, v_b, q_a, head, samples);
  if (!found) {
    out.reward = kCollisionPenalty;
    out.collided = true;
    return out;
  }
  out.q_b = found->q;
  out.reward = -found->angle;
  return out;
}

}  // namespace qpath
