#pragma once

#include "qpath/graph.hpp"

#include <vector>

namespace qpath {

struct Material {
  double youngs_pa = 3.84e9;
  double poisson = 0.35;
  double density = 1250.0;  // kg/m^3
  double diameter = 1.0;    // mm

  void validate() const;
  double area() const;            // mm^2
  double inertia() const;         // mm^4, about either bending axis
  double polar() const;           // mm^4
  double youngs_mpa() const { return youngs_pa * 1e-6; }
  double shear_mpa() const { return youngs_mpa() / (2.0 * (1.0 + poisson)); }
  // Strut weight per unit length under standard gravity, N/mm.
  double weight_per_mm() const { return density * 9.81 * 1e-9 * area(); }
};

struct PointLoad {
  NodeId node;
  Vec3 force;  // N
};

// Nodes with z <= min_z + tolerance count as attached to the build plate.
std::vector<std::uint8_t> default_grounding(const Graph& graph, double tolerance = 0.5);

// Partially printed frame: a subset of graph edges plus supports and loads.
struct FrameModel {
  const Graph* graph = nullptr;
  std::vector<EdgeId> struts;
  std::vector<std::uint8_t> grounded;  // per graph node
  Material material;
  double gravity_scale = 1.0;          // multiplies self-weight (along -z)
  std::vector<PointLoad> point_loads;

  FrameModel() = default;
  FrameModel(const Graph& g, Material mat);
};

struct DisplacementField {
  std::vector<Vec3> displacement;  // per graph node, mm (zero off-structure)
  double u_max = 0.0;
  NodeId argmax = -1;
  double residual = 0.0;           // ||K u - f|| / ||f||
};

// Linear-elastic 12-DOF frame elements with circular section, half of each
// strut's weight lumped on each endpoint, all six DOFs fixed at grounded
// nodes. Throws StructuralError listing nodes not connected to the ground
// through printed struts, or if the system is singular.
DisplacementField solve_displacement(const FrameModel& model);

// u_max with one more strut; the model is not changed.
double u_max_after(const FrameModel& model, EdgeId strut);

// Nodes touched by struts that cannot reach a grounded node.
std::vector<NodeId> floating_nodes(const Graph& graph, const std::vector<EdgeId>& struts,
                                   const std::vector<std::uint8_t>& grounded);

}  // namespace qpath
