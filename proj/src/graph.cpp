#include "qpath/graph.hpp"

#include "qpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace qpath {

Graph::Graph(std::vector<Vec3> positions, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  const int n = static_cast<int>(positions.size());
  nodes_.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!positions[i].allFinite()) {
      throw ArgumentError("node " + std::to_string(i) + " has a non-finite position");
    }
    nodes_.push_back({i, positions[i]});
  }

  edges_.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ArgumentError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                          ") references a missing node");
    }
    if (u == v) throw ArgumentError("self loop at node " + std::to_string(u));
    const NodeId a = std::min(u, v);
    const NodeId b = std::max(u, v);
    const double len = (nodes_[a].position - nodes_[b].position).norm();
    if (!(len > 0.0)) {
      throw ArgumentError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") has zero length");
    }
    edges_.push_back({a, b, len});
  }

  std::vector<int> order(edges_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::tie(edges_[x].a, edges_[x].b) < std::tie(edges_[y].a, edges_[y].b);
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Edge& p = edges_[order[k - 1]];
    const Edge& q = edges_[order[k]];
    if (p.a == q.a && p.b == q.b) {
      throw ArgumentError("duplicate edge (" + std::to_string(p.a) + "," + std::to_string(p.b) + ")");
    }
  }

  std::vector<int> count(n + 1, 0);
  for (const Edge& e : edges_) {
    ++count[e.a + 1];
    ++count[e.b + 1];
  }
  offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + count[i + 1];
  incidence_.resize(offsets_[n]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (int e = 0; e < edge_count(); ++e) {
    incidence_[fill[edges_[e].a]++] = {edges_[e].b, e};
    incidence_[fill[edges_[e].b]++] = {edges_[e].a, e};
  }
  for (int i = 0; i < n; ++i) {
    std::sort(incidence_.begin() + offsets_[i], incidence_.begin() + offsets_[i + 1],
              [](const Incidence& x, const Incidence& y) { return x.neighbor < y.neighbor; });
  }

  double sum = 0.0;
  for (const Edge& e : edges_) {
    max_edge_length_ = std::max(max_edge_length_, e.length);
    sum += e.length;
  }
  mean_edge_length_ = edges_.empty() ? 0.0 : sum / static_cast<double>(edges_.size());

  component_.assign(n, -1);
  for (int s = 0; s < n; ++s) {
    if (component_[s] >= 0) continue;
    std::deque<int> queue{s};
    component_[s] = component_count_;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const Incidence& inc : neighbors(v)) {
        if (component_[inc.neighbor] < 0) {
          component_[inc.neighbor] = component_count_;
          queue.push_back(inc.neighbor);
        }
      }
    }
    ++component_count_;
  }
}

int Graph::max_degree() const {
  int k = 0;
  for (int v = 0; v < node_count(); ++v) k = std::max(k, degree(v));
  return k;
}

std::optional<EdgeId> Graph::find_edge(NodeId a, NodeId b) const {
  if (!valid_node(a) || !valid_node(b)) return std::nullopt;
  const auto nb = neighbors(a);
  const auto it = std::lower_bound(nb.begin(), nb.end(), b,
                                   [](const Incidence& x, NodeId id) { return x.neighbor < id; });
  if (it != nb.end() && it->neighbor == b) return it->edge;
  return std::nullopt;
}

double Graph::min_z() const {
  double z = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) z = std::min(z, n.position.z());
  return z;
}

int Lsg::local_index(NodeId v) const {
  const auto it = std::lower_bound(lookup.begin(), lookup.end(), v,
                                   [](const auto& p, NodeId id) { return p.first < id; });
  if (it != lookup.end() && it->first == v) return it->second;
  return -1;
}

int Lsg::ring_of(NodeId v) const {
  const int k = local_index(v);
  return k < 0 ? -1 : ring[k];
}

Lsg extract_lsg(const Graph& graph, NodeId center, int rings) {
  if (!graph.valid_node(center)) throw ArgumentError("extract_lsg: invalid center node");
  if (rings < 0) throw ArgumentError("extract_lsg: negative ring count");

  Lsg lsg;
  lsg.center = center;
  lsg.rings = rings;

  // Visit marks reused across calls on the same thread.
  thread_local std::vector<std::uint32_t> mark;
  thread_local std::uint32_t stamp = 0;
  if (mark.size() < static_cast<std::size_t>(graph.node_count())) mark.assign(graph.node_count(), 0);
  if (++stamp == 0) {
    std::fill(mark.begin(), mark.end(), 0);
    stamp = 1;
  }

  std::vector<std::pair<NodeId, int>> found{{center, 0}};
  std::vector<NodeId> frontier{center};
  mark[center] = stamp;
  for (int r = 1; r <= rings && !frontier.empty(); ++r) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      for (const Incidence& inc : graph.neighbors(v)) {
        if (mark[inc.neighbor] != stamp) {
          mark[inc.neighbor] = stamp;
          next.push_back(inc.neighbor);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (NodeId v : next) found.emplace_back(v, r);
    frontier = std::move(next);
  }

  lsg.nodes.reserve(found.size());
  lsg.ring.reserve(found.size());
  for (const auto& [v, r] : found) {
    lsg.nodes.push_back(v);
    lsg.ring.push_back(r);
  }
  lsg.lookup.reserve(found.size());
  for (int k = 0; k < lsg.size(); ++k) lsg.lookup.emplace_back(lsg.nodes[k], k);
  std::sort(lsg.lookup.begin(), lsg.lookup.end());

  for (NodeId v : lsg.nodes) {
    for (const Incidence& inc : graph.neighbors(v)) {
      if (v < inc.neighbor && lsg.contains(inc.neighbor)) lsg.edges.push_back(inc.edge);
    }
  }
  std::sort(lsg.edges.begin(), lsg.edges.end());
  return lsg;
}

std::string to_string(CoverageMode mode) {
  switch (mode) {
    case CoverageMode::kWireframe: return "wireframe";
    case CoverageMode::kCcf: return "ccf";
    case CoverageMode::kMetal: return "metal";
  }
  return "unknown";
}

CoverageMode coverage_mode_from_string(const std::string& name) {
  if (name == "wireframe") return CoverageMode::kWireframe;
  if (name == "ccf") return CoverageMode::kCcf;
  if (name == "metal") return CoverageMode::kMetal;
  throw ArgumentError("unknown coverage mode '" + name + "'");
}

CoverageState::CoverageState(const Graph& graph, CoverageMode mode)
    : mode_(mode),
      edge_visits_(graph.edge_count(), 0),
      node_visited_(graph.node_count(), 0) {}

void CoverageState::visit_edge(EdgeId e) {
  if (e < 0 || e >= static_cast<int>(edge_visits_.size())) {
    throw ArgumentError("coverage: invalid edge id " + std::to_string(e));
  }
  if (mode_ != CoverageMode::kMetal && edge_visits_[e] >= edge_cap()) {
    throw CoverageViolation(CoverageViolation::Entity::kEdge, e,
                            "edge " + std::to_string(e) + " exceeds its " + to_string(mode_) +
                                " visit cap");
  }
  if (edge_visits_[e] == 0) ++covered_edges_;
  if (edge_visits_[e] < 255) ++edge_visits_[e];
}

void CoverageState::visit_node(NodeId v) {
  if (v < 0 || v >= static_cast<int>(node_visited_.size())) {
    throw ArgumentError("coverage: invalid node id " + std::to_string(v));
  }
  if (mode_ == CoverageMode::kMetal && node_visited_[v]) {
    throw CoverageViolation(CoverageViolation::Entity::kNode, v,
                            "node " + std::to_string(v) + " visited twice in metal mode");
  }
  if (!node_visited_[v]) {
    node_visited_[v] = 1;
    ++visited_nodes_;
  }
}

bool CoverageState::edge_open(const Graph& graph, EdgeId e) const {
  if (mode_ == CoverageMode::kMetal) {
    const Edge& ed = graph.edge(e);
    return !(node_visited_[ed.a] && node_visited_[ed.b]);
  }
  return edge_visits_[e] < edge_cap();
}

double CoverageState::edge_weight(const Graph& graph, EdgeId e) const {
  if (!edge_open(graph, e)) return 0.0;
  if (mode_ == CoverageMode::kCcf && edge_visits_[e] == 1) return 0.5;
  return 1.0;
}

bool CoverageState::complete(const Graph& graph) const {
  if (mode_ == CoverageMode::kMetal) return visited_nodes_ == graph.node_count();
  return covered_edges_ == graph.edge_count();
}

std::vector<EdgeId> CoverageState::uncovered_edges() const {
  std::vector<EdgeId> out;
  for (int e = 0; e < static_cast<int>(edge_visits_.size()); ++e) {
    if (edge_visits_[e] == 0) out.push_back(e);
  }
  return out;
}

std::vector<NodeId> CoverageState::unvisited_nodes() const {
  std::vector<NodeId> out;
  for (int v = 0; v < static_cast<int>(node_visited_.size()); ++v) {
    if (!node_visited_[v]) out.push_back(v);
  }
  return out;
}

CoverageState coverage_apply(CoverageState cov, CoverageMove move) {
  if (move.kind == CoverageMove::Kind::kEdge) {
    cov.visit_edge(move.id);
  } else {
    cov.visit_node(move.id);
  }
  return cov;
}

bool coverage_complete(const CoverageState& cov, const Graph& graph) { return cov.complete(graph); }

double Toolpath::total_length(const Graph& graph) const {
  double len = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    if (steps[k].is_jump) continue;
    len += (graph.position(steps[k].node) - graph.position(steps[k - 1].node)).norm();
  }
  return len;
}

double Toolpath::jump_length(const Graph& graph) const {
  double len = 0.0;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    if (!steps[k].is_jump) continue;
    len += (graph.position(steps[k].node) - graph.position(steps[k - 1].node)).norm();
  }
  return len;
}

int Toolpath::jump_count() const {
  int jumps = 0;
  for (std::size_t k = 1; k < steps.size(); ++k) jumps += steps[k].is_jump ? 1 : 0;
  return jumps;
}

void Toolpath::check_continuity(const Graph& graph) const {
  for (std::size_t k = 1; k < steps.size(); ++k) {
    if (steps[k].is_jump) continue;
    if (!graph.find_edge(steps[k - 1].node, steps[k].node)) {
      throw ArgumentError("toolpath step " + std::to_string(k) + " is not graph-adjacent");
    }
  }
}

}  // namespace qpath
