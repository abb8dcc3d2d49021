#pragma once

#include "qpath/qnet.hpp"
#include "qpath/random.hpp"
#include "qpath/reward.hpp"
#include "qpath/state.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace qpath {

struct Experience {
  std::shared_ptr<const MovingState> state;
  int current = 0;  // matrix index the move starts from
  int action = 0;   // matrix index of the chosen node
  double reward = 0.0;
  std::shared_ptr<const MovingState> next_state;
  bool terminal = false;  // last step of the lookahead, or a dead end after it
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  // Returns the slot written.
  int push(Experience e);
  const Experience& at(int k) const { return items_[k]; }

  // Distinct buffer indices, ascending, min(batch, size()) of them.
  std::vector<int> sample(int batch, Rng& rng) const;

 private:
  int capacity_;
  int next_ = 0;
  std::vector<Experience> items_;
};

struct LearnConfig {
  double gamma = 0.9;
  double eps_start = 0.9;
  double eps_decay = 0.98;
  double eps_min = 0.05;
  int min_episodes_per_ring = 10;     // no convergence before 10n episodes
  int patience_per_ring = 5;          // stop after 5n episodes without a new best
  int max_episodes = 500;
  int batch = 32;
  int buffer_capacity = 2000;
  int target_interval = 10;           // gradient steps between target copies
  int updates_per_episode = 0;      // 0: one per rollout transition
  AdamConfig adam;

  double epsilon(int episode) const;
  void validate() const;
};

// Indices j with a nonzero channel-0 entry (current, j).
std::vector<int> legal_actions(const MovingState& state, int current);

// Deterministic argmax over the given indices; ties go to the lowest index.
// Returns -1 for an empty set.
int argmax_action(const Eigen::VectorXd& q, const std::vector<int>& actions);

// Everything a rollout needs about the LSG being trained on.
struct LearnProblem {
  const Graph* graph = nullptr;
  const EncodedLsg* enc = nullptr;
  const RewardModel* model = nullptr;  // context at the current node; never mutated
  MovingState state;                   // state at the current node
  NodeId center = -1;
  int rings = 1;                       // n, the lookahead length
  bool history = true;                 // false: channels 1 and 2 mirror channel 0
};

// Encoded LSG and its state for a planner position. history ends with the
// center; its previous node, when adjacent, pins the embedding.
struct PreparedLsg {
  EncodedLsg enc;
  MovingState state;
};

PreparedLsg prepare_lsg(const Graph& graph, const CoverageState& cov, NodeId center, int rings,
                        int m, const std::vector<NodeId>& history,
                        OrderingKind kind = OrderingKind::kPattern);

LearnProblem make_problem(const Graph& graph, const PreparedLsg& prep, const RewardModel& model,
                          int rings);

struct Episode {
  std::vector<Experience> steps;
  std::vector<int> path;  // matrix indices, starting at the center
  double total = 0.0;     // sum of r_i
};

// Up to n epsilon-greedy steps on a clone of the reward context.
Episode rollout_episode(const LearnProblem& p, const QNetwork& net, double epsilon, Rng& rng);

// Evaluates a fixed path of matrix indices the way rollouts do, returning
// the sum of r_i; -inf if some step is illegal.
double path_return(const LearnProblem& p, const std::vector<int>& path);

// Max target-network Q over legal next actions; nullopt when terminal or
// without a legal next action.
std::optional<double> target_max(const Experience& e, const QNetwork& target);

// y = r + gamma * max over legal next actions of target Q, or r when terminal.
double bellman_target(const Experience& e, const QNetwork& target, double gamma);

struct TrainStats {
  int episodes = 0;
  int gradient_steps = 0;
  double best_total = 0.0;
  std::vector<double> best_history;  // running max after each episode
  std::vector<double> loss_history;  // mean minibatch loss per update
};

// Trains `net` in place until the best episode total stalls for
// patience * n episodes after at least min * n, or max_episodes is reached.
TrainStats train_until_converged(const LearnProblem& p, QNetwork& net, const LearnConfig& cfg,
                                 Rng& rng);

// Max-Q legal 1-ring neighbour of the center (lowest index on ties). The
// optional filter further restricts candidates by global node id. Returns
// nullopt at a dead end.
std::optional<NodeId> select_best_neighbor(const QNetwork& net, const LearnProblem& p,
                                           const std::function<bool(NodeId)>& allow = {},
                                           double* q_value = nullptr);

}  // namespace qpath
