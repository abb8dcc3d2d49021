#include "qpath/fea.hpp"

#include "qpath/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpath {

void Material::validate() const {
  if (!(youngs_pa > 0)) throw ConfigError("material: Young's modulus must be positive");
  if (!(poisson > 0 && poisson < 0.5)) throw ConfigError("material: Poisson ratio must lie in (0, 0.5)");
  if (!(diameter > 0)) throw ConfigError("material: strut diameter must be positive");
  if (!(density >= 0)) throw ConfigError("material: density must be non-negative");
}

double Material::area() const { return std::numbers::pi * diameter * diameter / 4.0; }
double Material::inertia() const { return std::numbers::pi * std::pow(diameter, 4) / 64.0; }
double Material::polar() const { return std::numbers::pi * std::pow(diameter, 4) / 32.0; }

std::vector<std::uint8_t> default_grounding(const Graph& graph, double tolerance) {
  std::vector<std::uint8_t> g(graph.node_count(), 0);
  if (graph.node_count() == 0) return g;
  const double zmin = graph.min_z();
  for (int v = 0; v < graph.node_count(); ++v) g[v] = graph.position(v).z() <= zmin + tolerance;
  return g;
}

FrameModel::FrameModel(const Graph& g, Material mat)
    : graph(&g), grounded(default_grounding(g)), material(mat) {}

std::vector<NodeId> floating_nodes(const Graph& graph, const std::vector<EdgeId>& struts,
                                   const std::vector<std::uint8_t>& grounded) {
  const int n = graph.node_count();
  std::vector<std::vector<NodeId>> adj(n);
  std::vector<std::uint8_t> touched(n, 0), reached(n, 0);
  for (EdgeId e : struts) {
    const Edge& ed = graph.edge(e);
    adj[ed.a].push_back(ed.b);
    adj[ed.b].push_back(ed.a);
    touched[ed.a] = touched[ed.b] = 1;
  }
  std::vector<NodeId> stack;
  for (int v = 0; v < n; ++v) {
    if (touched[v] && grounded[v]) {
      reached[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : adj[v]) {
      if (!reached[w]) {
        reached[w] = 1;
        stack.push_back(w);
      }
    }
  }
  std::vector<NodeId> out;
  for (int v = 0; v < n; ++v) {
    if (touched[v] && !reached[v]) out.push_back(v);
  }
  return out;
}

namespace {

using Mat12 = Eigen::Matrix<double, 12, 12>;

// Element stiffness in local axes (x along the strut).
Mat12 local_stiffness(const Material& mat, double L) {
  const double E = mat.youngs_mpa(), G = mat.shear_mpa();
  const double A = mat.area(), I = mat.inertia(), J = mat.polar();
  const double ea = E * A / L, gj = G * J / L;
  const double k12 = 12 * E * I / (L * L * L), k6 = 6 * E * I / (L * L);
  const double k4 = 4 * E * I / L, k2 = 2 * E * I / L;
  Mat12 k = Mat12::Zero();
  // DOF order per node: ux uy uz rx ry rz.
  k(0, 0) = k(6, 6) = ea;
  k(0, 6) = k(6, 0) = -ea;
  k(3, 3) = k(9, 9) = gj;
  k(3, 9) = k(9, 3) = -gj;
  // Bending in the x-y plane (uy, rz).
  k(1, 1) = k(7, 7) = k12;
  k(1, 7) = k(7, 1) = -k12;
  k(1, 5) = k(5, 1) = k(1, 11) = k(11, 1) = k6;
  k(7, 5) = k(5, 7) = k(7, 11) = k(11, 7) = -k6;
  k(5, 5) = k(11, 11) = k4;
  k(5, 11) = k(11, 5) = k2;
  // Bending in the x-z plane (uz, ry).
  k(2, 2) = k(8, 8) = k12;
  k(2, 8) = k(8, 2) = -k12;
  k(2, 4) = k(4, 2) = k(2, 10) = k(10, 2) = -k6;
  k(8, 4) = k(4, 8) = k(8, 10) = k(10, 8) = k6;
  k(4, 4) = k(10, 10) = k4;
  k(4, 10) = k(10, 4) = k2;
  return k;
}

Eigen::Matrix3d local_frame(const Vec3& a, const Vec3& b) {
  const Vec3 x = (b - a).normalized();
  Vec3 ref = Vec3::UnitZ();
  if (std::abs(x.dot(ref)) > 0.99) ref = Vec3::UnitY();
  const Vec3 y = ref.cross(x).normalized();
  const Vec3 z = x.cross(y);
  Eigen::Matrix3d r;
  r.row(0) = x;
  r.row(1) = y;
  r.row(2) = z;
  return r;
}

}  // namespace

DisplacementField solve_displacement(const FrameModel& model) {
  if (!model.graph) throw ArgumentError("solve_displacement: model has no graph");
  const Graph& g = *model.graph;
  model.material.validate();
  if (static_cast<int>(model.grounded.size()) != g.node_count()) {
    throw ArgumentError("solve_displacement: grounding vector size differs from node count");
  }

  DisplacementField out;
  out.displacement.assign(g.node_count(), Vec3::Zero());
  if (model.struts.empty()) return out;

  const auto floating = floating_nodes(g, model.struts, model.grounded);
  if (!floating.empty()) {
    throw StructuralError("structure has " + std::to_string(floating.size()) +
                              " node(s) not connected to the ground",
                          floating);
  }

  // Free (non-grounded) structural nodes get 6 DOFs each.
  std::vector<int> slot(g.node_count(), -1);
  int free_nodes = 0;
  for (EdgeId e : model.struts) {
    for (NodeId v : {g.edge(e).a, g.edge(e).b}) {
      if (!model.grounded[v] && slot[v] < 0) slot[v] = free_nodes++;
    }
  }
  if (free_nodes == 0) return out;
  const int ndof = 6 * free_nodes;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(model.struts.size() * 144);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
  const double w = model.material.weight_per_mm() * model.gravity_scale;

  for (EdgeId e : model.struts) {
    const Edge& ed = g.edge(e);
    const Vec3& pa = g.position(ed.a);
    const Vec3& pb = g.position(ed.b);
    const Eigen::Matrix3d r = local_frame(pa, pb);
    Mat12 t = Mat12::Zero();
    for (int blk = 0; blk < 4; ++blk) t.block<3, 3>(3 * blk, 3 * blk) = r;
    const Mat12 k = t.transpose() * local_stiffness(model.material, ed.length) * t;
    const int base[2] = {slot[ed.a], slot[ed.b]};
    for (int p = 0; p < 2; ++p) {
      if (base[p] < 0) continue;
      for (int q = 0; q < 2; ++q) {
        if (base[q] < 0) continue;
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            const double v = k(6 * p + i, 6 * q + j);
            if (v != 0.0) trip.emplace_back(6 * base[p] + i, 6 * base[q] + j, v);
          }
        }
      }
    }
    const double half = 0.5 * w * ed.length;
    for (int p = 0; p < 2; ++p) {
      if (base[p] >= 0) f[6 * base[p] + 2] -= half;
    }
  }
  for (const PointLoad& pl : model.point_loads) {
    if (!g.valid_node(pl.node)) throw ArgumentError("point load on an invalid node");
    if (slot[pl.node] < 0) continue;
    f.segment<3>(6 * slot[pl.node]) += pl.force;
  }

  Eigen::SparseMatrix<double> K(ndof, ndof);
  K.setFromTriplets(trip.begin(), trip.end());
  if (f.norm() == 0.0) return out;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
  if (solver.info() != Eigen::Success) {
    throw StructuralError("frame stiffness matrix is singular", {});
  }
  const Eigen::VectorXd u = solver.solve(f);
  out.residual = (K * u - f).norm() / f.norm();
  if (!u.allFinite() || out.residual > 1e-6) {
    throw StructuralError("frame stiffness matrix is singular", {});
  }
  for (int v = 0; v < g.node_count(); ++v) {
    if (slot[v] < 0) continue;
    out.displacement[v] = u.segment<3>(6 * slot[v]);
    const double mag = out.displacement[v].norm();
    if (mag > out.u_max) {
      out.u_max = mag;
      out.argmax = v;
    }
  }
  return out;
}

double u_max_after(const FrameModel& model, EdgeId strut) {
  FrameModel copy = model;
  copy.struts.push_back(strut);
  return solve_displacement(copy).u_max;
}

}  // namespace qpath
