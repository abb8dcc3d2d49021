#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qpath {

using NodeId = int;
using EdgeId = int;
using Vec3 = Eigen::Vector3d;

struct Node {
  NodeId id = 0;
  Vec3 position = Vec3::Zero();  // mm
};

// Canonical undirected edge, a < b.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 0.0;  // mm

  NodeId other(NodeId v) const { return v == a ? b : a; }
};

struct Incidence {
  NodeId neighbor;
  EdgeId edge;
};

// Undirected graph with dense node ids. Immutable after construction.
class Graph {
 public:
  Graph() = default;
  // Throws ArgumentError on out-of-range ids, self loops, duplicate edges,
  // zero-length edges or non-finite positions.
  Graph(std::vector<Vec3> positions, const std::vector<std::pair<NodeId, NodeId>>& edges);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Node& node(NodeId v) const { return nodes_[v]; }
  const Vec3& position(NodeId v) const { return nodes_[v].position; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Sorted by neighbor id.
  std::span<const Incidence> neighbors(NodeId v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }
  int degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  int max_degree() const;

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
  bool valid_node(NodeId v) const { return v >= 0 && v < node_count(); }

  double max_edge_length() const { return max_edge_length_; }
  double mean_edge_length() const { return mean_edge_length_; }
  double min_z() const;

  // Component label per node, labels dense from 0 in order of lowest node id.
  const std::vector<int>& components() const { return component_; }
  int component_count() const { return component_count_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<int> offsets_{0};
  std::vector<Incidence> incidence_;
  std::vector<int> component_;
  int component_count_ = 0;
  double max_edge_length_ = 0.0;
  double mean_edge_length_ = 0.0;
};

// n-ring local search graph around a center node.
struct Lsg {
  NodeId center = 0;
  int rings = 0;
  std::vector<NodeId> nodes;  // sorted by (ring, id); nodes[0] == center
  std::vector<int> ring;      // ring[k] is the BFS hop distance of nodes[k]
  std::vector<EdgeId> edges;  // member edges, ascending id

  int size() const { return static_cast<int>(nodes.size()); }
  // Local index of a global node id, or -1.
  int local_index(NodeId v) const;
  bool contains(NodeId v) const { return local_index(v) >= 0; }
  int ring_of(NodeId v) const;

  std::vector<std::pair<NodeId, int>> lookup;  // (node id, local index), sorted
};

Lsg extract_lsg(const Graph& graph, NodeId center, int rings);

enum class CoverageMode { kWireframe, kCcf, kMetal };

std::string to_string(CoverageMode mode);
CoverageMode coverage_mode_from_string(const std::string& name);

// Per-mode visiting bookkeeping: wireframe edges at most once, CCF edges at
// most twice, metal nodes at most once.
class CoverageState {
 public:
  CoverageState() = default;
  CoverageState(const Graph& graph, CoverageMode mode);

  CoverageMode mode() const { return mode_; }
  int edge_cap() const { return mode_ == CoverageMode::kCcf ? 2 : 1; }

  int edge_visits(EdgeId e) const { return edge_visits_[e]; }
  bool node_visited(NodeId v) const { return node_visited_[v] != 0; }
  const std::vector<std::uint8_t>& edge_visit_counts() const { return edge_visits_; }

  // Throws CoverageViolation when the cap would be exceeded; the state is
  // left unchanged in that case.
  void visit_edge(EdgeId e);
  void visit_node(NodeId v);

  // Travel along the edge is still permitted.
  bool edge_open(const Graph& graph, EdgeId e) const;
  // Multiplier used for the channel-A entry of an edge: 1 untouched, 1/2
  // once-traversed CCF edge, 0 closed.
  double edge_weight(const Graph& graph, EdgeId e) const;

  bool complete(const Graph& graph) const;
  std::vector<EdgeId> uncovered_edges() const;
  std::vector<NodeId> unvisited_nodes() const;
  int covered_edge_count() const { return covered_edges_; }
  int visited_node_count() const { return visited_nodes_; }

 private:
  CoverageMode mode_ = CoverageMode::kWireframe;
  std::vector<std::uint8_t> edge_visits_;
  std::vector<std::uint8_t> node_visited_;
  int covered_edges_ = 0;
  int visited_nodes_ = 0;
};

struct CoverageMove {
  enum class Kind { kEdge, kNode };
  Kind kind;
  int id;
};

// Value-returning form of CoverageState::visit_*.
CoverageState coverage_apply(CoverageState cov, CoverageMove move);
bool coverage_complete(const CoverageState& cov, const Graph& graph);

struct StepDiagnostics {
  double q_value = std::numeric_limits<double>::quiet_NaN();
  double collision = std::numeric_limits<double>::quiet_NaN();
  double u_max = std::numeric_limits<double>::quiet_NaN();        // mm
  double temperature = std::numeric_limits<double>::quiet_NaN();
  double turn_angle = std::numeric_limits<double>::quiet_NaN();   // rad
  double traversal = std::numeric_limits<double>::quiet_NaN();
  int episodes = 0;
  double wall_ms = 0.0;
};

struct ToolpathStep {
  NodeId node = 0;
  bool is_jump = false;
  double reward = 0.0;
  StepDiagnostics diagnostics;
};

struct Toolpath {
  std::vector<ToolpathStep> steps;

  // Sum of non-jump step lengths (deposited material), mm.
  double total_length(const Graph& graph) const;
  // Sum of jump travel distances, mm.
  double jump_length(const Graph& graph) const;
  int jump_count() const;  // excludes the initial placement
  // Throws ArgumentError if consecutive non-jump steps are not adjacent.
  void check_continuity(const Graph& graph) const;
};

}  // namespace qpath
