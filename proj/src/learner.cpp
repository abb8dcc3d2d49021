#include "qpath/learner.hpp"

#include "qpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qpath {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ArgumentError("replay buffer capacity must be positive");
  items_.reserve(static_cast<std::size_t>(capacity));
}

int ReplayBuffer::push(Experience e) {
  const int slot = next_;
  if (size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[slot] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
  return slot;
}

std::vector<int> ReplayBuffer::sample(int batch, Rng& rng) const {
  const int n = size();
  const int k = std::min(batch, n);
  // Partial Fisher-Yates over the index range.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < k; ++t) {
    const int j = t + rng.below(n - t);
    std::swap(idx[t], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double LearnConfig::epsilon(int episode) const {
  return std::max(eps_min, eps_start * std::pow(eps_decay, static_cast<double>(episode)));
}

void LearnConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(eps_min >= 0.0 && eps_start <= 1.0 && eps_decay > 0.0 && eps_decay <= 1.0))
    throw ConfigError("invalid epsilon schedule");
  if (min_episodes_per_ring < 1 || patience_per_ring < 1 || max_episodes < 1)
    throw ConfigError("episode caps must be positive");
  if (batch < 1 || buffer_capacity < 1 || target_interval < 1 || updates_per_episode < 0)
    throw ConfigError("batch, buffer and target interval must be positive, update count non-negative");
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
}

std::vector<int> legal_actions(const MovingState& state, int current) {
  return state.open_neighbors(current);
}

int argmax_action(const Eigen::VectorXd& q, const std::vector<int>& actions) {
  int best = -1;
  for (int a : actions) {
    if (best < 0 || q[a] > q[best] || (q[a] == q[best] && a < best)) best = a;
  }
  return best;
}

PreparedLsg prepare_lsg(const Graph& graph, const CoverageState& cov, NodeId center, int rings,
                        int m, const std::vector<NodeId>& history, OrderingKind kind) {
  std::optional<NodeId> v_q;
  const std::size_t h = history.size();
  if (h >= 2 && history[h - 1] == center && graph.find_edge(history[h - 2], center)) {
    v_q = history[h - 2];
  }
  PreparedLsg out{encode_lsg(graph, extract_lsg(graph, center, rings), v_q, m, kind), {}};
  out.state = build_state(graph, out.enc, cov, history);
  return out;
}

LearnProblem make_problem(const Graph& graph, const PreparedLsg& prep, const RewardModel& model,
                          int rings) {
  LearnProblem p;
  p.graph = &graph;
  p.enc = &prep.enc;
  p.model = &model;
  p.state = prep.state;
  p.center = prep.enc.lsg.center;
  p.rings = rings;
  return p;
}

namespace {

std::vector<int> legal_in(const LearnProblem& p, const RewardModel& ctx, const MovingState& s,
                          int cur) {
  std::vector<int> acts = legal_actions(s, cur);
  const NodeId u = p.enc->node_at(cur);
  std::erase_if(acts, [&](int j) { return !ctx.legal(u, p.enc->node_at(j)); });
  return acts;
}

// Channel-0 entries of every LSG edge touching the two move endpoints,
// re-read from the context's coverage after the move.
std::vector<MovingState::Entry> move_updates(const LearnProblem& p, const RewardModel& ctx,
                                             NodeId u, NodeId w) {
  std::vector<MovingState::Entry> out;
  for (NodeId x : {u, w}) {
    const int xi = p.enc->index_of(x);
    for (const auto& inc : p.graph->neighbors(x)) {
      const int yi = p.enc->index_of(inc.neighbor);
      if (yi < 0) continue;
      out.push_back({xi, yi, edge_entry(*p.graph, *p.enc, ctx.coverage(), inc.edge)});
    }
  }
  return out;
}

}  // namespace

Episode rollout_episode(const LearnProblem& p, const QNetwork& net, double epsilon, Rng& rng) {
  Episode ep;
  auto ctx = p.model->clone();
  ctx->begin_rollout();
  auto state = std::make_shared<const MovingState>(p.state);
  int cur = p.enc->index_of(p.center);
  if (cur < 0) throw ArgumentError("rollout: center is not part of the LSG");
  ep.path.push_back(cur);
  for (int i = 1; i <= p.rings; ++i) {
    const std::vector<int> acts = legal_in(p, *ctx, *state, cur);
    if (acts.empty()) break;
    int a;
    if (rng.uniform() < epsilon) {
      a = acts[static_cast<std::size_t>(rng.below(static_cast<int>(acts.size())))];
    } else {
      a = argmax_action(q_forward(net, *state), acts);
    }
    const NodeId u = p.enc->node_at(cur);
    const NodeId w = p.enc->node_at(a);
    const double r = ctx->step(i, u, w);
    MovingState advanced = advance_state(*state, cur, a, move_updates(p, *ctx, u, w));
    if (!p.history) advanced.channel(1) = advanced.channel(2) = advanced.channel(0);
    auto next = std::make_shared<const MovingState>(std::move(advanced));
    ep.steps.push_back({state, cur, a, r, next, i == p.rings});
    ep.total += r;
    ep.path.push_back(a);
    cur = a;
    state = std::move(next);
  }
  return ep;
}

double path_return(const LearnProblem& p, const std::vector<int>& path) {
  auto ctx = p.model->clone();
  ctx->begin_rollout();
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const NodeId u = p.enc->node_at(path[k - 1]);
    const NodeId w = p.enc->node_at(path[k]);
    if (!ctx->legal(u, w)) return -std::numeric_limits<double>::infinity();
    total += ctx->step(static_cast<int>(k), u, w);
  }
  return total;
}

std::optional<double> target_max(const Experience& e, const QNetwork& target) {
  if (e.terminal) return std::nullopt;
  const std::vector<int> acts = legal_actions(*e.next_state, e.action);
  if (acts.empty()) return std::nullopt;
  const Eigen::VectorXd q = q_forward(target, *e.next_state);
  double best = -std::numeric_limits<double>::infinity();
  for (int a : acts) best = std::max(best, q[a]);
  return best;
}

double bellman_target(const Experience& e, const QNetwork& target, double gamma) {
  const auto best = target_max(e, target);
  return best ? e.reward + gamma * *best : e.reward;
}

TrainStats train_until_converged(const LearnProblem& p, QNetwork& net, const LearnConfig& cfg,
                                 Rng& rng) {
  cfg.validate();
  if (net.m() != p.state.m()) throw ArgumentError("network and state dimensions differ");
  TrainStats stats;
  ReplayBuffer buffer(cfg.buffer_capacity);
  QNetwork target = net;
  OptimizerState opt(net.shape(), cfg.adam);
  GradientSet grads(net.shape());
  ForwardCache cache;
  Eigen::VectorXd d_out = Eigen::VectorXd::Zero(net.m());
  const int extent = p.state.size();
  const int min_episodes = cfg.min_episodes_per_ring * p.rings;
  const int patience = cfg.patience_per_ring * p.rings;

  // Target maxima per buffer slot, valid while the target is unchanged.
  struct CachedMax {
    int version = -1;
    std::optional<double> value;
  };
  std::vector<CachedMax> cached(static_cast<std::size_t>(cfg.buffer_capacity));
  int version = 0;

  bool have_best = false;
  int last_improvement = 0;
  for (int ep = 1; ep <= cfg.max_episodes; ++ep) {
    Episode e = rollout_episode(p, net, cfg.epsilon(ep - 1), rng);
    const int transitions = static_cast<int>(e.steps.size());
    for (auto& x : e.steps) cached[buffer.push(std::move(x))].version = -1;
    if (!have_best || e.total > stats.best_total) {
      stats.best_total = e.total;
      last_improvement = ep;
      have_best = true;
    }
    stats.best_history.push_back(stats.best_total);
    stats.episodes = ep;

    const int updates = cfg.updates_per_episode > 0
                            ? cfg.updates_per_episode
                            : std::max(1, transitions);
    for (int u = 0; u < updates && buffer.size() > 0; ++u) {
      const std::vector<int> batch = buffer.sample(cfg.batch, rng);
      grads.clear();
      double loss = 0.0;
      const double scale = 2.0 / static_cast<double>(batch.size());
      for (int k : batch) {
        const Experience& x = buffer.at(k);
        CachedMax& c = cached[k];
        if (c.version != version) c = {version, target_max(x, target)};
        const double y = c.value ? x.reward + cfg.gamma * *c.value : x.reward;
        const Eigen::VectorXd& q = q_forward(net, *x.state, cache);
        const double diff = q[x.action] - y;
        loss += diff * diff;
        d_out[x.action] = scale * diff;
        q_backward(net, cache, d_out, grads);
        d_out[x.action] = 0.0;
      }
      loss /= static_cast<double>(batch.size());
      if (!std::isfinite(loss)) throw TrainingDivergence("non-finite training loss", ep);
      try {
        optimizer_step(net, grads, opt);
      } catch (const TrainingDivergence& err) {
        throw TrainingDivergence(err.what(), ep);
      }
      stats.loss_history.push_back(loss);
      ++stats.gradient_steps;
      if (stats.gradient_steps % cfg.target_interval == 0) {
        copy_to_target(net, target, extent);
        ++version;
      }
    }

    if (ep > min_episodes && ep - last_improvement >= patience) break;
  }
  return stats;
}

std::optional<NodeId> select_best_neighbor(const QNetwork& net, const LearnProblem& p,
                                           const std::function<bool(NodeId)>& allow,
                                           double* q_value) {
  const int cur = p.enc->index_of(p.center);
  std::vector<int> acts = legal_in(p, *p.model, p.state, cur);
  if (allow) std::erase_if(acts, [&](int j) { return !allow(p.enc->node_at(j)); });
  if (acts.empty()) return std::nullopt;
  const Eigen::VectorXd q = q_forward(net, p.state);
  const int best = argmax_action(q, acts);
  if (q_value) *q_value = q[best];
  return p.enc->node_at(best);
}

}  // namespace qpath
