#include "qpath/planner.hpp"

#include "qpath/baselines.hpp"
#include "qpath/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <limits>
#include <thread>

namespace qpath {

NetShape PlanConfig::shape() const {
  NetShape s = widths;
  s.m = state_size();
  return s;
}

RewardConfig PlanConfig::reward_config() const {
  RewardConfig r = reward;
  r.mode = mode;
  return r;
}

void PlanConfig::validate() const {
  if (rings < 1) throw ConfigError("LSG ring count n must be at least 1");
  if (priors < 1) throw ConfigError("prior count K must be at least 1");
  if (restarts < 1) throw ConfigError("restart budget must be at least 1");
  if (m < 0) throw ConfigError("state size must be positive");
  learn.validate();
}

std::vector<NodeId> start_set(const Graph& graph, const PlanConfig& cfg) {
  std::vector<NodeId> out;
  const int n = graph.node_count();
  switch (cfg.mode) {
    case CoverageMode::kWireframe: {
      const auto grounded = default_grounding(graph, cfg.reward.grounding_tolerance);
      for (NodeId v = 0; v < n; ++v)
        if (grounded[v] && graph.degree(v) > 0) out.push_back(v);
      break;
    }
    case CoverageMode::kCcf:
      for (NodeId v = 0; v < n; ++v)
        if (graph.degree(v) % 2 == 1) out.push_back(v);
      if (out.empty())
        for (NodeId v = 0; v < n; ++v)
          if (graph.degree(v) > 0) out.push_back(v);
      break;
    case CoverageMode::kMetal: {
      const int full = graph.max_degree();
      for (NodeId v = 0; v < n; ++v)
        if (graph.degree(v) < full) out.push_back(v);
      if (out.empty())
        for (NodeId v = 0; v < n; ++v) out.push_back(v);
      break;
    }
  }
  return out;
}

namespace {

// Start nodes in the order runs use them.
std::vector<NodeId> start_order(const Graph& graph, const PlanConfig& cfg) {
  std::vector<NodeId> order = start_set(graph, cfg);
  if (order.empty()) throw PlanningFailure("no admissible start node", {}, {});
  Rng rng(cfg.seed ^ 0x5ea7ed5ea7edULL);
  rng.shuffle(std::span<NodeId>(order));
  return order;
}

std::uint64_t run_seed(std::uint64_t seed, int run) {
  return run == 0 ? seed : splitmix64(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(run));
}

double distance(const Graph& g, NodeId a, NodeId b) {
  return (g.position(a) - g.position(b)).norm();
}

}  // namespace

std::optional<NodeId> jump_target(const Graph& graph, const CoverageState& cov, NodeId v_c,
                                  const std::vector<std::uint8_t>* attached_roots,
                                  const std::vector<std::uint8_t>& blocked) {
  const int n = graph.node_count();
  std::optional<NodeId> best;
  double best_d = 0.0;
  auto consider = [&](NodeId v, bool farthest) {
    const double d = distance(graph, v_c, v);
    if (!best || (farthest ? d > best_d : d < best_d)) {
      best = v;
      best_d = d;
    }
  };
  if (cov.mode() == CoverageMode::kMetal) {
    for (NodeId v = 0; v < n; ++v)
      if (!cov.node_visited(v) && !blocked[v]) consider(v, true);
    return best;
  }
  std::optional<NodeId> fallback;
  double fallback_d = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    if (blocked[v]) continue;
    bool uncovered = false, covered = attached_roots && (*attached_roots)[v];
    for (const auto& inc : graph.neighbors(v)) {
      if (cov.edge_visits(inc.edge) == 0) uncovered = true;
      else covered = true;
    }
    if (!uncovered) continue;
    const double d = distance(graph, v_c, v);
    if (!fallback || d < fallback_d) {
      fallback = v;
      fallback_d = d;
    }
    if (covered) consider(v, false);
  }
  return best ? best : fallback;
}

bool ccf_keeps_reachable(const Graph& graph, const CoverageState& cov, NodeId u, NodeId w) {
  const auto moved = graph.find_edge(u, w);
  if (!moved) return false;
  auto visits = [&](EdgeId e) { return cov.edge_visits(e) + (e == *moved ? 1 : 0); };
  bool any_uncovered = false;
  for (EdgeId e = 0; e < graph.edge_count(); ++e) any_uncovered = any_uncovered || visits(e) == 0;
  if (!any_uncovered) return true;
  std::vector<std::uint8_t> seen(graph.node_count(), 0);
  std::deque<NodeId> queue{w};
  seen[w] = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (const auto& inc : graph.neighbors(v)) {
      if (visits(inc.edge) >= 2 || seen[inc.neighbor]) continue;
      seen[inc.neighbor] = 1;
      queue.push_back(inc.neighbor);
    }
  }
  for (EdgeId e = 0; e < graph.edge_count(); ++e) {
    if (visits(e) == 0 && !seen[graph.edge(e).a] && !seen[graph.edge(e).b]) return false;
  }
  return true;
}

PlanResult plan_with_chooser(const Graph& graph, const PlanConfig& cfg, std::optional<NodeId> start,
                             const NextChooser& choose) {
  cfg.validate();
  const auto t_begin = std::chrono::steady_clock::now();
  const NodeId s0 = start ? *start : start_order(graph, cfg).front();
  if (!graph.valid_node(s0)) throw ArgumentError("start node out of range");

  auto model = make_reward_model(graph, cfg.reward_config());
  const auto* wire = dynamic_cast<const WireframeRewardModel*>(model.get());

  PlanResult res;
  res.start = s0;
  res.seed = cfg.seed;
  ToolpathStep first;
  first.node = s0;
  model->place(s0, &first.diagnostics);
  model->on_commit();
  res.path.steps.push_back(first);

  const int max_moves =
      cfg.max_moves > 0 ? cfg.max_moves : 3 * (graph.edge_count() + graph.node_count()) + 10;
  std::vector<std::uint8_t> blocked(graph.node_count(), 0);
  std::vector<NodeId> history{s0};
  NodeId cur = s0;
  int moves = 0;

  auto fail = [&](const std::string& why) {
    const auto& cov = model->coverage();
    throw PlanningFailure(why, cov.uncovered_edges(), cov.unvisited_nodes());
  };

  while (!model->coverage().complete(graph)) {
    if (++moves > max_moves) fail("move limit exceeded");
    const auto t0 = std::chrono::steady_clock::now();
    ToolpathStep step;
    std::function<bool(NodeId)> allow;
    if (cfg.mode == CoverageMode::kWireframe) {
      allow = [&](NodeId w) { return model->commit_allowed(cur, w); };
    } else if (cfg.mode == CoverageMode::kCcf) {
      allow = [&](NodeId w) { return ccf_keeps_reachable(graph, model->coverage(), cur, w); };
    }
    const std::optional<NodeId> next = choose(*model, cur, history, allow, step, res);

    if (next) {
      step.node = *next;
      step.reward = model->step(1, cur, *next, &step.diagnostics);
      model->on_commit();
      std::fill(blocked.begin(), blocked.end(), 0);
      history.push_back(*next);
      if (history.size() > 3) history.erase(history.begin());
      cur = *next;
    } else {
      blocked[cur] = 1;
      const auto* roots = wire ? &wire->grounded() : nullptr;
      const auto target = jump_target(graph, model->coverage(), cur, roots, blocked);
      if (!target) fail("no reachable uncovered element");
      step.node = *target;
      step.is_jump = true;
      model->place(*target, &step.diagnostics);
      model->on_commit();
      history = {*target};
      cur = *target;
    }
    step.diagnostics.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.path.steps.push_back(step);
  }

  res.metrics = measure_toolpath(graph, res.path, cfg.reward_config(), cfg.hot_threshold);
  res.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_begin).count();
  return res;
}

NextChooser make_chooser(const Graph& graph, const PlanConfig& cfg, PriorStore* store) {
  if (cfg.algo == PlannerAlgo::kBfs) {
    const int rings = cfg.rings;
    return [rings](const RewardModel& model, NodeId cur, const std::vector<NodeId>&,
                   const std::function<bool(NodeId)>& allow, ToolpathStep& step, PlanResult&) {
      BfsResult br;
      auto next = bfs_best_next(model, cur, rings, &br, allow);
      step.diagnostics.q_value = br.best_reward;
      return next;
    };
  }
  if (cfg.algo == PlannerAlgo::kGreedy) {
    return [](const RewardModel& model, NodeId cur, const std::vector<NodeId>&,
              const std::function<bool(NodeId)>& allow, ToolpathStep&, PlanResult&) {
      return greedy_next(model, cur, allow);
    };
  }
  // Learner state shared by the copies of the returned closure.
  struct DqnState {
    PriorStore local;
    PriorStore* priors;
    Rng rng;
    std::optional<QNetwork> last;  // previous LSG's trained network
  };
  auto st = std::make_shared<DqnState>(
      DqnState{PriorStore(cfg.priors), nullptr, Rng(cfg.seed), std::nullopt});
  st->priors = store ? store : &st->local;
  const NetShape shape = cfg.shape();
  return [&graph, cfg, shape, st](const RewardModel& model, NodeId cur,
                                  const std::vector<NodeId>& history,
                                  const std::function<bool(NodeId)>& allow, ToolpathStep& step,
                                  PlanResult& res) -> std::optional<NodeId> {
    PriorStore& priors = *st->priors;
    const PreparedLsg prep = prepare_lsg(graph, model.coverage(), cur, cfg.rings, shape.m,
                                         cfg.history ? history : std::vector<NodeId>{cur},
                                         cfg.ordering);
    if (prep.state.open_neighbors(prep.enc.index_of(cur)).empty()) return std::nullopt;
    LearnProblem problem = make_problem(graph, prep, model, cfg.rings);
    problem.history = cfg.history;

    LsgRecord rec;
    rec.center = cur;
    rec.lsg_size = prep.state.size();
    rec.from_prior = cfg.reuse_priors && priors.size() > 0;
    // Without prior reuse each LSG starts from the previous LSG's result.
    QNetwork net = cfg.reuse_priors ? priors.select(prep.state, shape, st->rng)
                   : st->last       ? *st->last
                                    : QNetwork::initialized(shape, st->rng);
    const TrainStats stats = train_until_converged(problem, net, cfg.learn, st->rng);
    rec.episodes = stats.episodes;
    rec.best_total = stats.best_total;
    res.lsgs.push_back(rec);
    step.diagnostics.episodes = stats.episodes;

    const auto next = select_best_neighbor(net, problem, allow, &step.diagnostics.q_value);
    if (cfg.reuse_priors) {
      priors.insert({prep.state, std::move(net)});
    } else {
      st->last = std::move(net);
    }
    return next;
  };
}

PlanResult plan_toolpath(const Graph& graph, const PlanConfig& cfg, std::optional<NodeId> start,
                         PriorStore* store) {
  return plan_with_chooser(graph, cfg, start, make_chooser(graph, cfg, store));
}

double plan_objective(const PlanResult& r, CoverageMode mode) {
  switch (mode) {
    case CoverageMode::kWireframe: return r.metrics.peak_u_max;
    case CoverageMode::kCcf: return 1e9 * r.metrics.sharp_turns + r.metrics.total_length;
    case CoverageMode::kMetal: return r.metrics.peak_hot_area;
  }
  return 0.0;
}

int thread_count_from_env() {
  const char* v = std::getenv("QPATH_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("QPATH_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

RestartResult plan_with_restarts(const Graph& graph, const PlanConfig& cfg, int threads) {
  cfg.validate();
  const std::vector<NodeId> order = start_order(graph, cfg);
  const int runs = cfg.restarts;
  if (threads <= 0) threads = thread_count_from_env();
  threads = std::max(1, std::min(threads, runs));

  std::vector<std::optional<PlanResult>> results(runs);
  std::vector<RunSummary> summaries(runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < runs; r = next++) {
      PlanConfig rc = cfg;
      rc.seed = run_seed(cfg.seed, r);
      RunSummary& sum = summaries[r];
      sum.run = r;
      sum.start = order[static_cast<std::size_t>(r) % order.size()];
      try {
        PlanResult pr = plan_toolpath(graph, rc, sum.start);
        pr.run = r;
        sum.feasible = true;
        sum.objective = plan_objective(pr, cfg.mode);
        results[r] = std::move(pr);
      } catch (const PlanningFailure& e) {
        sum.failure = e.what();
      } catch (const StructuralError& e) {
        sum.failure = e.what();
      } catch (const IllegalAction& e) {
        sum.failure = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int best = -1;
  for (int r = 0; r < runs; ++r) {
    if (!summaries[r].feasible) continue;
    if (best < 0 || summaries[r].objective < summaries[best].objective) best = r;
  }
  if (best < 0) {
    std::string why = "all " + std::to_string(runs) + " planning runs failed";
    if (!summaries.empty()) why += ": " + summaries.front().failure;
    throw PlanningFailure(why, {}, {});
  }
  return {std::move(*results[best]), std::move(summaries)};
}

}  // namespace qpath
