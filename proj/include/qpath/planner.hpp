#pragma once

#include "qpath/learner.hpp"
#include "qpath/metrics.hpp"
#include "qpath/prior.hpp"
#include "qpath/reward.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qpath {

// Per-step decision rule inside the shared outer loop.
enum class PlannerAlgo { kDqn, kBfs, kGreedy };

struct PlanConfig {
  PlannerAlgo algo = PlannerAlgo::kDqn;
  CoverageMode mode = CoverageMode::kWireframe;
  int rings = 6;          // n
  int priors = 10;        // K
  bool reuse_priors = true;  // false: warm start from the previous LSG's network
  bool history = true;    // false: history channels mirror the current adjacency
  int m = 0;              // state size; 0 means 50 n
  OrderingKind ordering = OrderingKind::kPattern;
  NetShape widths;        // channel widths; m is filled in
  LearnConfig learn;
  RewardConfig reward;    // reward.mode is overwritten by mode
  std::uint64_t seed = 1;
  int restarts = 1;
  int max_moves = 0;      // 0: 3 (E + N) + 10
  double hot_threshold = std::numeric_limits<double>::quiet_NaN();  // metal objective

  int state_size() const { return m > 0 ? m : 50 * rings; }
  NetShape shape() const;
  RewardConfig reward_config() const;
  void validate() const;
};

struct LsgRecord {
  NodeId center = -1;
  int lsg_size = 0;
  int episodes = 0;
  bool from_prior = false;
  double best_total = 0.0;
};

struct PlanResult {
  Toolpath path;
  PathMetrics metrics;
  std::vector<LsgRecord> lsgs;
  NodeId start = -1;
  int run = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

// Nodes a run may start from: grounded nodes (wireframe), odd-degree nodes
// or all (ccf), boundary nodes with fewer than the maximal degree (metal).
std::vector<NodeId> start_set(const Graph& graph, const PlanConfig& cfg);

// Dead-end jump destination, or nullopt when nothing is left. `blocked`
// marks nodes already found to be dead ends since the last committed move.
std::optional<NodeId> jump_target(const Graph& graph, const CoverageState& cov, NodeId v_c,
                                  const std::vector<std::uint8_t>* attached_roots,
                                  const std::vector<std::uint8_t>& blocked);

// True if every still-uncovered edge stays reachable over edges with spare
// capacity after moving u -> w.
bool ccf_keeps_reachable(const Graph& graph, const CoverageState& cov, NodeId u, NodeId w);

// Picks the next node from `cur`, or nullopt at a dead end. `allow` is the
// mode's commit filter; the chooser may fill step diagnostics.
using NextChooser = std::function<std::optional<NodeId>(
    const RewardModel& model, NodeId cur, const std::vector<NodeId>& history,
    const std::function<bool(NodeId)>& allow, ToolpathStep& step, PlanResult& res)>;

// The outer loop shared by every planner: commit filters, jumps, move
// limit and final metrics.
PlanResult plan_with_chooser(const Graph& graph, const PlanConfig& cfg, std::optional<NodeId> start,
                             const NextChooser& choose);

// Decision rule for cfg.algo. The DQN rule keeps its rng and priors (in
// `store` when given) across calls; the graph must outlive it.
NextChooser make_chooser(const Graph& graph, const PlanConfig& cfg, PriorStore* store = nullptr);

// One planning run. Throws PlanningFailure with the uncovered remainder.
// `store` carries priors across calls when given.
PlanResult plan_toolpath(const Graph& graph, const PlanConfig& cfg,
                         std::optional<NodeId> start = std::nullopt, PriorStore* store = nullptr);

struct RunSummary {
  int run = 0;
  NodeId start = -1;
  bool feasible = false;
  std::string failure;
  double objective = 0.0;
};

struct RestartResult {
  PlanResult best;
  std::vector<RunSummary> runs;
};

// Lower is better: peak u_max, sharp turns then length (lexicographic via
// a large weight), peak hot area.
double plan_objective(const PlanResult& r, CoverageMode mode);

// Runs cfg.restarts independent plans from distinct seeded starts, in
// parallel when threads > 1, and keeps the best feasible one (lowest run
// index on ties). threads <= 0 reads QPATH_THREADS (default 1).
RestartResult plan_with_restarts(const Graph& graph, const PlanConfig& cfg, int threads = 0);

int thread_count_from_env();

}  // namespace qpath
