#pragma once

#include "qpath/collision.hpp"
#include "qpath/fea.hpp"
#include "qpath/graph.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace qpath {

enum class DiscountKind { kGaussian, kExponential };

struct DiscountParams {
  DiscountKind kind = DiscountKind::kGaussian;
  double sigma = 0.865;
  double mu = 1.0;
};

// Gaussian: 0.9 exp(-(i - mu)^2 / (2 sigma^2)) + 0.1. Exponential: 0.9^i.
double discount(int i, const DiscountParams& p = {});

// Turning-angle reward for alpha in [0, pi]: ~1 below pi/3, ~0.9 up to
// 2pi/3, ~0 beyond.
double ccf_turn_reward(double alpha);

inline constexpr double kSharpTurn = 2.0 * 3.14159265358979323846 / 3.0;
// Sharp turns are counted with a small tolerance so that exact 120 degree
// corners of regular grids are not sharp.
inline constexpr double kSharpTurnTolerance = 1e-6;

// Angle between consecutive travel directions at `mid` (0 straight, pi reversal).
double turning_angle(const Vec3& prev, const Vec3& mid, const Vec3& next);

struct RewardConfig {
  CoverageMode mode = CoverageMode::kWireframe;
  DiscountParams discount;

  // wireframe
  Material material;
  HeadShape head = HeadShape::frustum();
  HeadMode head_mode = HeadMode::kFixed;
  int orientation_samples = 200;
  double grounding_tolerance = 0.5;  // mm above the lowest node
  double unsupported_penalty = 1000.0;  // used as U when a strut would float

  // metal
  double heat_max = 100.0;
  double heat_radius_factor = 3.0;  // R = factor * mean edge length
  double diffusion = 0.2;           // beta
  double decay = 0.05;              // delta
  int diffusion_rings = 12;         // 2n

  void validate(const Graph& graph) const;
};

// Application context plus step reward. step() evaluates the reward of the
// i-th move of an n-step lookahead and commits the move to this context;
// callers explore by cloning.
class RewardModel {
 public:
  virtual ~RewardModel() = default;
  virtual std::unique_ptr<RewardModel> clone() const = 0;

  const Graph& graph() const { return *graph_; }
  const CoverageState& coverage() const { return coverage_; }
  CoverageMode mode() const { return coverage_.mode(); }
  const RewardConfig& config() const { return *config_; }

  // Move along an existing edge that coverage still permits.
  virtual bool legal(NodeId from, NodeId to) const;
  // Extra conditions for committing a step to the final toolpath.
  virtual bool commit_allowed(NodeId, NodeId) const { return true; }

  // Starts a lookahead rollout (resets per-rollout state such as the
  // collision flag).
  virtual void begin_rollout() {}
  // Called after a step or placement is committed to the real toolpath.
  virtual void on_commit() {}

  // Reward r_i including discount(i). Throws IllegalAction if !legal.
  double step(int i, NodeId from, NodeId to, StepDiagnostics* diag = nullptr);

  // Path start or landing after a jump: no edge is traversed.
  virtual void place(NodeId v, StepDiagnostics* diag = nullptr) = 0;

 protected:
  RewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config);
  virtual double do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) = 0;

  const Graph* graph_;
  std::shared_ptr<const RewardConfig> config_;
  CoverageState coverage_;
};

// Thread-safe u_max cache keyed by a hash of the printed strut set.
class FeaCache {
 public:
  bool find(std::uint64_t key, double& value) const;
  void store(std::uint64_t key, double value);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, double> map_;
};

std::uint64_t strut_key(EdgeId e);

class WireframeRewardModel : public RewardModel {
 public:
  WireframeRewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config);
  std::unique_ptr<RewardModel> clone() const override;

  bool commit_allowed(NodeId from, NodeId to) const override;
  void begin_rollout() override { collided_ = false; }
  void place(NodeId v, StepDiagnostics* diag = nullptr) override;
  void on_commit() override { world_.freeze(); }

  // C and U of a candidate move without committing it.
  CollisionOutcome collision_term(NodeId from, NodeId to) const;
  double displacement_term(NodeId from, NodeId to) const;
  // u_max of the structure printed so far.
  double current_u_max() const;

  const FrameModel& frame() const { return frame_; }
  const Vec3& orientation() const { return q_; }
  const std::vector<std::uint8_t>& grounded() const { return frame_.grounded; }

 protected:
  double do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) override;

 private:
  double u_max_for(std::uint64_t key, const std::vector<EdgeId>& struts) const;

  FrameModel frame_;
  WorldObstacles world_;
  std::shared_ptr<const std::vector<Vec3>> samples_;
  std::shared_ptr<FeaCache> cache_;
  std::uint64_t key_ = 0;
  Vec3 q_ = Vec3::UnitZ();
  bool collided_ = false;
};

class CcfRewardModel : public RewardModel {
 public:
  CcfRewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config);
  std::unique_ptr<RewardModel> clone() const override;
  void place(NodeId v, StepDiagnostics* diag = nullptr) override;

  // Turning angle a move would make at `from`; 0 at a path start.
  double turn_angle(NodeId from, NodeId to) const;
  // 0 on first traversal, -L / L_max on the second.
  double traversal_term(NodeId from, NodeId to) const;
  double max_length() const { return max_length_; }

 protected:
  double do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) override;

 private:
  double max_length_;
  NodeId prev_ = -1;  // node before the current one on a continuous stretch
};

class MetalRewardModel : public RewardModel {
 public:
  MetalRewardModel(const Graph& graph, std::shared_ptr<const RewardConfig> config);
  std::unique_ptr<RewardModel> clone() const override;
  bool legal(NodeId from, NodeId to) const override;
  void place(NodeId v, StepDiagnostics* diag = nullptr) override;

  double temperature(NodeId v) const { return stored_[v] * scale_; }
  std::vector<double> temperatures() const;
  void set_temperatures(const std::vector<double>& t);
  // -discount(i) T(v) for an unvisited node, -1000 for a revisit.
  double step_reward(int i, NodeId v) const;
  double radius() const { return kernel_->radius; }

  // Adds the laser kernel centred at v.
  void deposit_heat(NodeId v);
  // One explicit step T <- (1 - delta)(T + beta L T): the Laplacian acts on
  // the `rings`-ring neighbourhood of v with its outer ring held fixed; the
  // decay applies to every node.
  void diffuse(NodeId v, int rings);

 protected:
  double do_step(int i, NodeId from, NodeId to, StepDiagnostics* diag) override;

 private:
  struct Kernel {
    double radius = 0.0;
    std::vector<int> offsets;
    std::vector<std::pair<NodeId, double>> entries;  // per node: (target, heat)
  };
  static std::shared_ptr<const Kernel> build_kernel(const Graph& graph, const RewardConfig& cfg);
  void arrive(NodeId v);

  std::shared_ptr<const Kernel> kernel_;
  std::vector<double> stored_;
  double scale_ = 1.0;
};

std::unique_ptr<RewardModel> make_reward_model(const Graph& graph, const RewardConfig& config);

// Nodes with T strictly above the threshold.
int high_temperature_count(const std::vector<double>& temps, double threshold);
// Linear-interpolated percentile (0..100) of a value list.
double percentile(std::vector<double> values, double pct);

}  // namespace qpath
