#pragma once

#include "qpath/graph.hpp"
#include "qpath/reward.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qpath {

struct BfsResult {
  std::vector<NodeId> best_path;  // starts at the center
  double best_reward = 0.0;       // sum of discounted step rewards
  long long explored = 0;         // maximal paths enumerated
};

// Exhaustive search over every legal path of up to n moves from v_c, each
// extended until n moves or a dead end. Rewards come from clones of `model`
// exactly as in learner rollouts. Ties go to the lexicographically smallest
// path. `allow` filters the first move only. nullopt at a dead end.
std::optional<NodeId> bfs_best_next(const RewardModel& model, NodeId v_c, int n,
                                    BfsResult* out = nullptr,
                                    const std::function<bool(NodeId)>& allow = {});

// Legal neighbour with the largest one-step reward, lowest id on ties.
std::optional<NodeId> greedy_next(const RewardModel& model, NodeId v_c,
                                  const std::function<bool(NodeId)>& allow = {},
                                  double* reward = nullptr);

struct DfsConstraints {
  long long budget = 2'000'000;  // node expansions
  // Take a jump instead of backtracking when no move is legal at all. Needed
  // where a continuous path may not exist (wireframe, metal).
  bool allow_jumps = false;
};

struct DfsResult {
  Toolpath path;
  bool complete = false;
  bool budget_exhausted = false;
  long long expansions = 0;
  long long backtracks = 0;
};

// Whole-graph depth-first search that tries moves in order of immediate
// reward and backtracks at coverage dead ends. A stand-in for the dual-graph
// DFS comparison planner, not a reproduction of it. Partial results (budget
// spent or search space exhausted) carry complete = false and hold the
// deepest-coverage path seen.
// `prototype` is an unplaced reward context; it is cloned, never mutated.
DfsResult dfs_backtrack_plan(const RewardModel& prototype, NodeId start,
                             const DfsConstraints& constraints = {});

}  // namespace qpath
