#include "qpath/metrics.hpp"

#include "qpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpath {

int count_sharp_turns(const std::vector<double>& angles) {
  return static_cast<int>(std::count_if(angles.begin(), angles.end(), [](double a) {
    return a > kSharpTurn + kSharpTurnTolerance;
  }));
}

std::vector<int> turning_angle_histogram(const std::vector<double>& angles) {
  std::vector<int> bins(18, 0);
  for (double a : angles) {
    const double deg = a * 180.0 / std::numbers::pi;
    // Round-off on exact multiples of 10 degrees must not push a value into
    // the next bucket.
    int k = static_cast<int>(std::floor(deg / 10.0 + 1e-9));
    bins[std::clamp(k, 0, 17)] += 1;
  }
  return bins;
}

PathMetrics measure_toolpath(const Graph& graph, const Toolpath& path, const RewardConfig& config,
                             double hot_threshold, int move_budget) {
  PathMetrics pm;
  if (path.steps.empty()) return pm;
  path.check_continuity(graph);
  auto model = make_reward_model(graph, config);
  auto* metal = dynamic_cast<MetalRewardModel*>(model.get());
  pm.hot_threshold = std::isnan(hot_threshold) ? 0.5 * config.heat_max : hot_threshold;
  auto observe_heat = [&] {
    const int hot = high_temperature_count(metal->temperatures(), pm.hot_threshold);
    pm.peak_hot_area = std::max(pm.peak_hot_area, hot);
    pm.hot_area_integral += hot;
  };

  model->place(path.steps[0].node);
  model->on_commit();
  if (metal) observe_heat();
  for (std::size_t k = 1; k < path.steps.size(); ++k) {
    if (move_budget >= 0 && pm.steps >= move_budget) break;
    const ToolpathStep& st = path.steps[k];
    const NodeId from = path.steps[k - 1].node;
    ++pm.steps;
    if (st.is_jump) {
      ++pm.jumps;
      pm.jump_length += (graph.position(st.node) - graph.position(from)).norm();
      model->place(st.node);
      model->on_commit();
      if (metal) observe_heat();
      continue;
    }
    pm.total_length += (graph.position(st.node) - graph.position(from)).norm();
    if (!model->legal(from, st.node)) {
      throw IllegalAction("toolpath step " + std::to_string(k) + " breaks the coverage contract");
    }
    StepDiagnostics d;
    model->begin_rollout();
    if (model->mode() == CoverageMode::kCcf) {
      const EdgeId e = *graph.find_edge(from, st.node);
      if (model->coverage().edge_visits(e) == 1) ++pm.double_traversals;
    }
    model->step(1, from, st.node, &d);
    model->on_commit();
    switch (model->mode()) {
      case CoverageMode::kWireframe:
        pm.u_max_series.push_back(d.u_max);
        if (d.u_max >= config.unsupported_penalty) ++pm.unsupported;
        if (d.collision <= kCollisionPenalty) ++pm.collisions;
        break;
      case CoverageMode::kCcf:
        // The first move after a placement has no junction.
        if (!path.steps[k - 1].is_jump && k >= 2) pm.turn_angles.push_back(d.turn_angle);
        break;
      case CoverageMode::kMetal:
        observe_heat();
        break;
    }
  }
  pm.complete = model->coverage().complete(graph);
  if (!pm.u_max_series.empty()) {
    pm.peak_u_max = *std::max_element(pm.u_max_series.begin(), pm.u_max_series.end());
  }
  pm.sharp_turns = count_sharp_turns(pm.turn_angles);
  if (metal) pm.final_temperatures = metal->temperatures();
  return pm;
}

}  // namespace qpath
