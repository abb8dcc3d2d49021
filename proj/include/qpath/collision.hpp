#pragma once

#include "qpath/graph.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace qpath {

// Convex polytope given by its vertices; the hull is implicit.
struct Polytope {
  std::vector<Vec3> vertices;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Polytope() = default;
  explicit Polytope(std::vector<Vec3> verts);
  Vec3 support(const Vec3& dir) const;
};

// Printer head in its local frame: tip at the origin, body along +z.
struct HeadShape {
  std::vector<Vec3> vertices;

  // Frustum hull with `sides`-gon rings.
  static HeadShape frustum(double tip_radius = 0.5, double top_radius = 15.0,
                           double height = 40.0, int sides = 8);
};

// Head placed with its tip at `tip` and axis along unit vector `q`.
Polytope place_head(const HeadShape& head, const Vec3& tip, const Vec3& q);

// Hull of the head at both endpoints of a straight move with fixed
// orientation. A zero-length move gives the head at v_a.
Polytope swept_volume(const Vec3& v_a, const Vec3& v_b, const Vec3& q, const HeadShape& head);

// 8-sided prism circumscribing the cylinder of the given diameter.
Polytope strut_prism(const Vec3& a, const Vec3& b, double diameter, int sides = 8);

// Euclidean distance between two convex hulls (0 when they overlap), by GJK.
double polytope_distance(const Polytope& a, const Polytope& b);

inline constexpr double kContactTolerance = 1e-6;  // mm
bool polytopes_intersect(const Polytope& a, const Polytope& b, double tol = kContactTolerance);

struct Obstacle {
  EdgeId strut = -1;  // -1 for environment geometry
  Polytope shape;
};

// Printed struts as prisms plus optional environment polytopes. The committed
// part is shared between copies; copies append privately.
class WorldObstacles {
 public:
  WorldObstacles() : base_(std::make_shared<std::vector<Obstacle>>()) {}

  void add(Obstacle ob) { extra_.push_back(std::move(ob)); }
  void add_strut(const Graph& graph, EdgeId e, double diameter);
  // Moves private additions into a fresh shared base.
  void freeze();

  std::size_t size() const { return base_->size() + extra_.size(); }
  template <typename F>
  void for_each(F&& f) const {
    for (const Obstacle& o : *base_) f(o);
    for (const Obstacle& o : extra_) f(o);
  }

 private:
  std::shared_ptr<const std::vector<Obstacle>> base_;
  std::vector<Obstacle> extra_;
};

// True iff any obstacle whose strut is not in `exclude` meets `vol`.
bool intersects(const WorldObstacles& world, const Polytope& vol, const std::vector<EdgeId>& exclude,
                double tol = kContactTolerance);

// Deterministic low-discrepancy directions on the upper hemisphere.
std::vector<Vec3> hemisphere_samples(int count = 200);

struct OrientationResult {
  Vec3 q;
  double angle;  // rad from q_a
};

// q_a itself if free, otherwise the sample closest in angle to q_a whose swept
// volume is free. Struts incident to either endpoint are contact, not
// collision.
std::optional<OrientationResult> min_rotation_orientation(const Graph& graph,
                                                          const WorldObstacles& world, NodeId v_a,
                                                          NodeId v_b, const Vec3& q_a,
                                                          const HeadShape& head,
                                                          const std::vector<Vec3>& samples);

enum class HeadMode { kFixed, kReorientable };

inline constexpr double kCollisionPenalty = -1000.0;

struct CollisionOutcome {
  double reward = 0.0;  // C
  Vec3 q_b = Vec3::UnitZ();
  bool collided = false;
};

// C = 0 / -1000 for a fixed head, -theta / -1000 when reorientable. If
// `earlier_collision` is set the penalty is returned without testing.
CollisionOutcome collision_reward(const Graph& graph, const WorldObstacles& world, NodeId v_a,
                                  NodeId v_b, const Vec3& q_a, const HeadShape& head, HeadMode mode,
                                  const std::vector<Vec3>& samples, bool earlier_collision = false);

}  // namespace qpath
