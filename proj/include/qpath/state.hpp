#pragma once

#include "qpath/graph.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace qpath {

// 2D layout of an LSG, indexed like Lsg::nodes. v_c sits at (0,0) and v_q
// (or the virtual anchor) at (-1,0).
struct Embedding2D {
  std::vector<Eigen::Vector2d> coords;
};

// Nodes are projected onto a plane fitted through the LSG, then rotated and
// scaled so the pins land exactly. Without v_q the anchor direction is the
// global -x axis projected into that plane.
Embedding2D embed_lsg(const Graph& graph, const Lsg& lsg, std::optional<NodeId> v_q);

enum class OrderingKind { kPattern, kRawId };

struct NodeOrdering {
  int m = 0;
  std::vector<int> rank;        // local index -> matrix index
  std::vector<NodeId> node_at;  // matrix index -> global node id (occupied prefix)

  int size() const { return static_cast<int>(node_at.size()); }
  int index_of(const Lsg& lsg, NodeId v) const {
    const int k = lsg.local_index(v);
    return k < 0 ? -1 : rank[k];
  }
};

// Ascending x, then y, then node id; coordinates are rounded to 1e-6 first so
// that round-off cannot reorder geometrically tied nodes. Throws StateOverflow
// if the LSG does not fit in m.
NodeOrdering order_nodes(const Lsg& lsg, const Embedding2D& emb, int m);
// Baseline ordering by global node id, used to measure what the pattern
// ordering buys.
NodeOrdering order_nodes_by_id(const Lsg& lsg, int m);

// Symmetric m x m x 3 stack [A, A+, A++] stored as strict upper-triangle
// entries per channel, sorted by (i, j). Padding indices never appear.
class MovingState {
 public:
  struct Entry {
    int i;
    int j;
    double value;
  };

  MovingState() = default;
  MovingState(int m, int size) : m_(m), size_(size) {}

  int m() const { return m_; }
  // Number of occupied indices; all entries live in [0, size).
  int size() const { return size_; }

  const std::vector<Entry>& channel(int c) const { return channels_[c]; }
  std::vector<Entry>& channel(int c) { return channels_[c]; }

  double at(int c, int i, int j) const;
  Eigen::MatrixXd dense(int c) const;
  // Indices j with channel-0 entry (i, j) > 0, ascending.
  std::vector<int> open_neighbors(int i) const;

  bool operator==(const MovingState& other) const;

 private:
  int m_ = 0;
  int size_ = 0;
  std::array<std::vector<Entry>, 3> channels_;
};

// Everything needed to turn coverage + history into states for one LSG.
struct EncodedLsg {
  Lsg lsg;
  NodeOrdering ordering;
  double max_length = 1.0;  // normalizer: longest member edge
  // Member edges in matrix coordinates (i < j), sorted.
  struct LocalEdge {
    int i;
    int j;
    EdgeId edge;
  };
  std::vector<LocalEdge> local_edges;

  int index_of(NodeId v) const { return ordering.index_of(lsg, v); }
  NodeId node_at(int idx) const { return ordering.node_at[idx]; }
};

EncodedLsg encode_lsg(const Graph& graph, Lsg lsg, std::optional<NodeId> v_q, int m,
                      OrderingKind kind = OrderingKind::kPattern);

// Channel-0 value of a member edge under the given coverage.
double edge_entry(const Graph& graph, const EncodedLsg& enc, const CoverageState& cov, EdgeId e);

// history holds the most recent path nodes, oldest first, ending with the
// current node (at most the last three are used). History nodes outside the
// LSG, or steps that are not LSG edges, drop their channel entry.
MovingState build_state(const Graph& graph, const EncodedLsg& enc, const CoverageState& cov,
                        const std::vector<NodeId>& history);

// [A, A+, A++] -> [A*, A, A+] with A* = A zeroed at (r, s). Throws
// IllegalAction on a zero entry.
MovingState advance_state(const MovingState& state, int r, int s);

// Same shift, but A* is A with the listed channel-0 entries overwritten
// (value 0 removes the entry). Used when a move changes more than one edge
// weight, e.g. metal node visits or CCF half-open edges.
MovingState advance_state(const MovingState& state, int r, int s,
                          const std::vector<MovingState::Entry>& updates);

// Squared Frobenius distance over all three channels, counting both
// triangles.
double squared_distance(const MovingState& a, const MovingState& b);

inline constexpr double kSimilarityLambda = 0.76;
// rho = (1 / lambda) / (1 + ||S - S_k||_F). Throws ArgumentError on
// mismatched m.
double similarity(const MovingState& a, const MovingState& b);

}  // namespace qpath
