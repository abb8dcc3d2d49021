#include "qpath/baselines.hpp"

#include "qpath/errors.hpp"
#include "qpath/planner.hpp"

#include <algorithm>
#include <limits>
#include <memory>

namespace qpath {

namespace {

std::vector<NodeId> legal_from(const RewardModel& ctx, const Graph& graph, NodeId u) {
  std::vector<NodeId> out;
  for (const auto& inc : graph.neighbors(u)) {
    if (ctx.legal(u, inc.neighbor)) out.push_back(inc.neighbor);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Enumerator {
  const Graph& graph;
  int n;
  BfsResult& res;
  std::vector<NodeId> path;
  bool have = false;

  void visit(const RewardModel& ctx, NodeId u, int depth, double total,
             const std::function<bool(NodeId)>* allow) {
    std::vector<NodeId> next;
    if (depth < n) next = legal_from(ctx, graph, u);
    if (allow && *allow) std::erase_if(next, [&](NodeId w) { return !(*allow)(w); });
    if (next.empty()) {
      if (depth == 0) return;
      ++res.explored;
      // Enumeration runs in ascending id order, so the first maximum found
      // is the lexicographically smallest path.
      if (!have || total > res.best_reward) {
        res.best_reward = total;
        res.best_path = path;
        have = true;
      }
      return;
    }
    for (NodeId w : next) {
      auto branch = ctx.clone();
      const double r = branch->step(depth + 1, u, w);
      path.push_back(w);
      visit(*branch, w, depth + 1, total + r, nullptr);
      path.pop_back();
    }
  }
};

}  // namespace

std::optional<NodeId> bfs_best_next(const RewardModel& model, NodeId v_c, int n, BfsResult* out,
                                    const std::function<bool(NodeId)>& allow) {
  if (n < 1) throw ArgumentError("bfs_best_next: n must be at least 1");
  BfsResult local;
  BfsResult& res = out ? *out : local;
  res = BfsResult{};
  auto root = model.clone();
  root->begin_rollout();
  Enumerator en{model.graph(), n, res, {v_c}};
  en.visit(*root, v_c, 0, 0.0, &allow);
  if (!en.have) {
    res.best_path = {v_c};
    return std::nullopt;
  }
  return res.best_path[1];
}

std::optional<NodeId> greedy_next(const RewardModel& model, NodeId v_c,
                                  const std::function<bool(NodeId)>& allow, double* reward) {
  std::optional<NodeId> best;
  double best_r = -std::numeric_limits<double>::infinity();
  for (NodeId w : legal_from(model, model.graph(), v_c)) {
    if (allow && !allow(w)) continue;
    auto ctx = model.clone();
    ctx->begin_rollout();
    const double r = ctx->step(1, v_c, w);
    if (!best || r > best_r) {
      best = w;
      best_r = r;
    }
  }
  if (best && reward) *reward = best_r;
  return best;
}

namespace {

int covered_units(const RewardModel& m) {
  const auto& cov = m.coverage();
  return cov.mode() == CoverageMode::kMetal ? cov.visited_node_count() : cov.covered_edge_count();
}

}  // namespace

DfsResult dfs_backtrack_plan(const RewardModel& prototype, NodeId start,
                             const DfsConstraints& constraints) {
  const Graph& graph = prototype.graph();
  if (!graph.valid_node(start)) throw ArgumentError("dfs_backtrack_plan: start out of range");
  if (constraints.budget < 1) throw ArgumentError("dfs_backtrack_plan: budget must be positive");

  struct Frame {
    std::unique_ptr<RewardModel> ctx;  // state after arriving at `step.node`
    ToolpathStep step;
    std::vector<NodeId> order;  // remaining candidates, best first
    std::size_t next = 0;
  };

  const bool wire = prototype.mode() == CoverageMode::kWireframe;
  auto candidates = [&](const RewardModel& ctx, NodeId u) {
    std::vector<std::pair<double, NodeId>> scored;
    for (NodeId w : legal_from(ctx, graph, u)) {
      if (wire && !ctx.commit_allowed(u, w)) continue;
      auto probe = ctx.clone();
      probe->begin_rollout();
      scored.emplace_back(probe->step(1, u, w), w);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<NodeId> out;
    for (const auto& [r, w] : scored) out.push_back(w);
    return out;
  };

  DfsResult res;
  std::vector<Frame> stack;
  {
    Frame f;
    f.ctx = prototype.clone();
    f.step.node = start;
    f.ctx->place(start, &f.step.diagnostics);
    f.ctx->on_commit();
    f.order = candidates(*f.ctx, start);
    stack.push_back(std::move(f));
  }

  int best_units = -1;
  auto snapshot = [&] {
    Toolpath t;
    t.steps.reserve(stack.size());
    for (const auto& f : stack) t.steps.push_back(f.step);
    return t;
  };

  while (!stack.empty()) {
    Frame& top = stack.back();
    const int units = covered_units(*top.ctx);
    if (top.ctx->coverage().complete(graph)) {
      res.path = snapshot();
      res.complete = true;
      return res;
    }
    if (units > best_units) {
      best_units = units;
      res.path = snapshot();
    }
    if (res.expansions >= constraints.budget) {
      res.budget_exhausted = true;
      return res;
    }

    if (top.next < top.order.size()) {
      const NodeId u = top.step.node;
      const NodeId w = top.order[top.next++];
      Frame f;
      f.ctx = top.ctx->clone();
      f.ctx->begin_rollout();
      f.step.node = w;
      f.step.reward = f.ctx->step(1, u, w, &f.step.diagnostics);
      f.ctx->on_commit();
      f.order = candidates(*f.ctx, w);
      ++res.expansions;
      stack.push_back(std::move(f));
      continue;
    }

    if (top.order.empty() && constraints.allow_jumps) {
      std::vector<std::uint8_t> blocked(graph.node_count(), 0);
      blocked[top.step.node] = 1;
      const auto* w = dynamic_cast<const WireframeRewardModel*>(top.ctx.get());
      const auto target = jump_target(graph, top.ctx->coverage(), top.step.node,
                                      w ? &w->grounded() : nullptr, blocked);
      if (target) {
        Frame f;
        f.ctx = top.ctx->clone();
        f.step.node = *target;
        f.step.is_jump = true;
        f.ctx->place(*target, &f.step.diagnostics);
        f.ctx->on_commit();
        f.order = candidates(*f.ctx, *target);
        top.order.push_back(-1);  // marks the jump as taken
        top.next = top.order.size();
        ++res.expansions;
        stack.push_back(std::move(f));
        continue;
      }
    }

    stack.pop_back();
    ++res.backtracks;
  }
  return res;
}

}  // namespace qpath
