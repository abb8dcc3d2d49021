#include "qpath/reward.hpp"

#include "qpath/errors.hpp"
#include "qpath/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace qpath {

double discount(int i, const DiscountParams& p) {
  if (i < 1) throw ArgumentError("discount: step index must be >= 1");
  if (p.kind == DiscountKind::kExponential) return std::pow(0.9, i);
  const double x = i - p.mu;
  return 0.9 * std::exp(-x * x / (2.0 * p.sigma * p.sigma)) + 0.1;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double ccf_turn_reward(double alpha) {
  const double pi = std::numbers::pi;
  const double w = pi / 60.0;
  return logistic((pi / 3 - alpha) / w) +
         0.9 * (logistic((alpha - pi / 3) / w) - logistic((alpha - 2 * pi / 3) / w));
}

double turning_angle(const Vec3& prev, const Vec3& mid, const Vec3& next) {
  const Vec3 a = mid - prev;
  const Vec3 b = next - mid;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

void RewardConfig::validate(const Graph& graph) const {
  if (!(discount.sigma > 0)) throw ConfigError("discount sigma must be positive");
  if (mode == CoverageMode::kWireframe) {
    material.validate();
    if (head.vertices.empty()) throw ConfigError("head shape has no vertices");
    if (orientation_samples < 1) throw ConfigError("orientation sample count must be positive");
  }
  if (mode == CoverageMode::kMetal) {
    if (!(heat_max >= 0)) throw ConfigError("heat_max must be non-negative");
    if (!(heat_radius_factor > 0)) throw ConfigError("heat radius factor must be positive");
    if (!(decay >= 0 && decay < 1)) throw ConfigError("decay must lie in [0, 1)");
    if (!(diffusion >= 0)) throw ConfigError("diffusion rate must be non-negative");
    if (diffusion * graph.max_degree() >= 1.0) {
      throw ConfigError("diffusion rate " + std::to_string(diffusion) + " is unstable for max degree " +
                        std::to_string(graph.max_degree()));
    }
    if (diffusion_rings < 1) throw ConfigError("diffusion ring count must be positive");
  }
}

RewardModel::RewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config)
    : graph_(&graph), config_(std::move(config)), coverage_(graph, config_->mode) {}

bool RewardModel::legal(NodeId from, NodeId to) const {
  if (!graph_->valid_node(from) || !graph_->valid_node(to)) return false;
  const auto e = graph_->find_edge(from, to);
  return e && coverage_.edge_open(*graph_, *e);
}

double RewardModel::step(int i, NodeId from, NodeId to, StepDiagnostics* diag) {
  if (!legal(from, to)) {
    throw IllegalAction("move " + std::to_string(from) + " -> " + std::to_string(to) +
                        " is not permitted");
  }
  return do_step(i, from, to, diag);
}

bool FeaCache::find(std::uint64_t key, double& value) const {
  std::lock_guard lock(mu_);
  const auto it = map_.find(key);
  if (it == map_.end()) return false;
  value = it->second;
  return true;
}

void FeaCache::store(std::uint64_t key, double value) {
  std::lock_guard lock(mu_);
  map_.emplace(key, value);
}

std::size_t FeaCache::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

std::uint64_t strut_key(EdgeId e) {
  return splitmix64(0x5eed0f57a7e5ULL + static_cast<std::uint64_t>(e));
}

// ---------------------------------------------------------------- wireframe

WireframeRewardModel::WireframeRewardModel(const Graph& graph,
                                           std::shared_ptr<const RewardConfig> config)
    : RewardModel(graph, std::move(config)),
      frame_(graph, config_->material),
      samples_(std::make_shared<const std::vector<Vec3>>(
          hemisphere_samples(config_->orientation_samples))),
      cache_(std::make_shared<FeaCache>()) {
  frame_.grounded = default_grounding(graph, config_->grounding_tolerance);
}

std::unique_ptr<RewardModel> WireframeRewardModel::clone() const {
  return std::make_unique<WireframeRewardModel>(*this);
}

double WireframeRewardModel::u_max_for(std::uint64_t key, const std::vector<EdgeId>& struts) const {
  double u;
  if (cache_->find(key, u)) return u;
  FrameModel model = frame_;
  model.struts = struts;
  try {
    u = solve_displacement(model).u_max;
  } catch (const StructuralError&) {
    u = config_->unsupported_penalty;
  }
  cache_->store(key, u);
  return u;
}

CollisionOutcome WireframeRewardModel::collision_term(NodeId from, NodeId to) const {
  return collision_reward(*graph_, world_, from, to, q_, config_->head, config_->head_mode,
                          *samples_, collided_);
}

double WireframeRewardModel::displacement_term(NodeId from, NodeId to) const {
  const EdgeId e = *graph_->find_edge(from, to);
  std::vector<EdgeId> struts = frame_.struts;
  struts.push_back(e);
  return u_max_for(key_ ^ strut_key(e), struts);
}

double WireframeRewardModel::current_u_max() const { return u_max_for(key_, frame_.struts); }

bool WireframeRewardModel::commit_allowed(NodeId from, NodeId to) const {
  const CollisionOutcome c = collision_reward(*graph_, world_, from, to, q_, config_->head,
                                              config_->head_mode, *samples_, false);
  return !c.collided && displacement_term(from, to) < config_->unsupported_penalty;
}

double WireframeRewardModel::do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) {
  const EdgeId e = *graph_->find_edge(from, to);
  const CollisionOutcome c = collision_term(from, to);
  const double u = displacement_term(from, to);
  const double r = discount(i, config_->discount) * (c.reward - u);

  coverage_.visit_edge(e);
  coverage_.visit_node(from);
  coverage_.visit_node(to);
  frame_.struts.push_back(e);
  key_ ^= strut_key(e);
  world_.add_strut(*graph_, e, config_->material.diameter);
  q_ = c.q_b;
  collided_ = collided_ || c.collided;
  if (diag) {
    diag->collision = c.reward;
    diag->u_max = u;
  }
  return r;
}

void WireframeRewardModel::place(NodeId v, StepDiagnostics* diag) {
  coverage_.visit_node(v);
  if (diag) diag->u_max = current_u_max();
}

// ---------------------------------------------------------------------- ccf

CcfRewardModel::CcfRewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config)
    : RewardModel(graph, std::move(config)),
      max_length_(graph.max_edge_length() > 0 ? graph.max_edge_length() : 1.0) {}

std::unique_ptr<RewardModel> CcfRewardModel::clone() const {
  return std::make_unique<CcfRewardModel>(*this);
}

double CcfRewardModel::turn_angle(NodeId from, NodeId to) const {
  if (prev_ < 0) return 0.0;
  return turning_angle(graph_->position(prev_), graph_->position(from), graph_->position(to));
}

double CcfRewardModel::traversal_term(NodeId from, NodeId to) const {
  const EdgeId e = *graph_->find_edge(from, to);
  const int visits = coverage_.edge_visits(e);
  if (visits >= 2) throw IllegalAction("third traversal of edge " + std::to_string(e));
  return visits == 0 ? 0.0 : -graph_->edge(e).length / max_length_;
}

double CcfRewardModel::do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) {
  const double alpha = turn_angle(from, to);
  const double d = traversal_term(from, to);
  const double r = discount(i, config_->discount) * (ccf_turn_reward(alpha) + d);
  coverage_.visit_edge(*graph_->find_edge(from, to));
  coverage_.visit_node(from);
  coverage_.visit_node(to);
  prev_ = from;
  if (diag) {
    diag->turn_angle = alpha;
    diag->traversal = d;
  }
  return r;
}

void CcfRewardModel::place(NodeId v, StepDiagnostics*) {
  coverage_.visit_node(v);
  prev_ = -1;
}

// -------------------------------------------------------------------- metal

std::shared_ptr<const MetalRewardModel::Kernel> MetalRewardModel::build_kernel(
    const Graph& graph, const RewardConfig& cfg) {
  auto k = std::make_shared<Kernel>();
  k->radius = cfg.heat_radius_factor * graph.mean_edge_length();
  const double R = k->radius;
  const int n = graph.node_count();
  k->offsets.assign(n + 1, 0);
  if (!(R > 0)) {
    for (int v = 0; v < n; ++v) {
      k->entries.emplace_back(v, cfg.heat_max);
      k->offsets[v + 1] = v + 1;
    }
    return k;
  }
  using Cell = std::tuple<long, long, long>;
  std::map<Cell, std::vector<NodeId>> cells;
  auto cell_of = [R](const Vec3& p) {
    return Cell{static_cast<long>(std::floor(p.x() / R)), static_cast<long>(std::floor(p.y() / R)),
                static_cast<long>(std::floor(p.z() / R))};
  };
  for (int v = 0; v < n; ++v) cells[cell_of(graph.position(v))].push_back(v);
  for (int v = 0; v < n; ++v) {
    const Vec3& p = graph.position(v);
    const auto [cx, cy, cz] = cell_of(p);
    std::vector<std::pair<NodeId, double>> local;
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells.find(Cell{cx + dx, cy + dy, cz + dz});
          if (it == cells.end()) continue;
          for (NodeId u : it->second) {
            const double d = (graph.position(u) - p).norm();
            if (d < R) local.emplace_back(u, cfg.heat_max * (1.0 - std::pow(d / R, 0.3)));
          }
        }
      }
    }
    std::sort(local.begin(), local.end());
    k->entries.insert(k->entries.end(), local.begin(), local.end());
    k->offsets[v + 1] = static_cast<int>(k->entries.size());
  }
  return k;
}

MetalRewardModel::MetalRewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config)
    : RewardModel(graph, std::move(config)),
      kernel_(build_kernel(graph, *config_)),
      stored_(graph.node_count(), 0.0) {}

std::unique_ptr<RewardModel> MetalRewardModel::clone() const {
  return std::make_unique<MetalRewardModel>(*this);
}

bool MetalRewardModel::legal(NodeId from, NodeId to) const {
  if (!graph_->valid_node(from) || !graph_->valid_node(to)) return false;
  return graph_->find_edge(from, to).has_value() && !coverage_.node_visited(to);
}

std::vector<double> MetalRewardModel::temperatures() const {
  std::vector<double> t(stored_.size());
  for (std::size_t v = 0; v < t.size(); ++v) t[v] = stored_[v] * scale_;
  return t;
}

void MetalRewardModel::set_temperatures(const std::vector<double>& t) {
  if (t.size() != stored_.size()) throw ArgumentError("temperature field size differs from node count");
  stored_ = t;
  scale_ = 1.0;
}

double MetalRewardModel::step_reward(int i, NodeId v) const {
  if (coverage_.node_visited(v)) return -1000.0;
  return -discount(i, config_->discount) * temperature(v);
}

void MetalRewardModel::deposit_heat(NodeId v) {
  for (int k = kernel_->offsets[v]; k < kernel_->offsets[v + 1]; ++k) {
    const auto& [u, h] = kernel_->entries[k];
    stored_[u] += h / scale_;
  }
}

void MetalRewardModel::diffuse(NodeId v, int rings) {
  const double beta = config_->diffusion;
  if (beta > 0.0 && rings > 0) {
    const Lsg region = extract_lsg(*graph_, v, rings);
    std::vector<double> delta(region.size(), 0.0);
    for (int k = 0; k < region.size(); ++k) {
      if (region.ring[k] >= rings) continue;  // outer ring held fixed
      const NodeId u = region.nodes[k];
      double lap = 0.0;
      for (const Incidence& inc : graph_->neighbors(u)) lap += stored_[inc.neighbor] - stored_[u];
      delta[k] = beta * lap;
    }
    for (int k = 0; k < region.size(); ++k) stored_[region.nodes[k]] += delta[k];
  }
  scale_ *= 1.0 - config_->decay;
  if (scale_ < 1e-150) {
    for (double& t : stored_) t *= scale_;
    scale_ = 1.0;
  }
}

void MetalRewardModel::arrive(NodeId v) {
  coverage_.visit_node(v);
  deposit_heat(v);
  diffuse(v, config_->diffusion_rings);
}

double MetalRewardModel::do_step(int i, NodeId, NodeId to, StepDiagnostics* diag) {
  const double r = step_reward(i, to);
  if (diag) diag->temperature = temperature(to);
  arrive(to);
  return r;
}

void MetalRewardModel::place(NodeId v, StepDiagnostics* diag) {
  if (diag) diag->temperature = temperature(v);
  arrive(v);
}

std::unique_ptr<RewardModel> make_reward_model(const Graph& graph, const RewardConfig& config) {
  config.validate(graph);
  auto shared = std::make_shared<const RewardConfig>(config);
  switch (config.mode) {
    case CoverageMode::kWireframe: return std::make_unique<WireframeRewardModel>(graph, shared);
    case CoverageMode::kCcf: return std::make_unique<CcfRewardModel>(graph, shared);
    case CoverageMode::kMetal: return std::make_unique<MetalRewardModel>(graph, shared);
  }
  throw ConfigError("unknown coverage mode");
}

int high_temperature_count(const std::vector<double>& temps, double threshold) {
  return static_cast<int>(std::count_if(temps.begin(), temps.end(), [threshold](double t) { return t > threshold; }));
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ArgumentError("percentile of an empty list");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

}  // namespace qpath
