#pragma once

#include "qpath/graph.hpp"
#include "qpath/reward.hpp"

#include <limits>
#include <vector>

namespace qpath {

// Quality figures of a finished toolpath, obtained by replaying it through a
// fresh reward context. Replay throws IllegalAction / CoverageViolation if
// the path breaks the coverage contract.
struct PathMetrics {
  bool complete = false;
  int steps = 0;  // moves after the initial placement, jumps included
  int jumps = 0;
  double total_length = 0.0;  // deposited, mm
  double jump_length = 0.0;

  // wireframe
  double peak_u_max = std::numeric_limits<double>::quiet_NaN();  // mm
  std::vector<double> u_max_series;  // after every committed strut
  int collisions = 0;
  int unsupported = 0;

  // ccf
  int sharp_turns = 0;
  int double_traversals = 0;
  std::vector<double> turn_angles;  // rad, at every continuous junction

  // metal; "hot" means T above hot_threshold
  double hot_threshold = std::numeric_limits<double>::quiet_NaN();
  int peak_hot_area = 0;
  double hot_area_integral = 0.0;  // sum over moves of the hot node count
  std::vector<double> final_temperatures;
};

// hot_threshold defaults to half the kernel peak when NaN. For metal, the
// replay can be stopped after `move_budget` moves (negative: whole path).
PathMetrics measure_toolpath(const Graph& graph, const Toolpath& path, const RewardConfig& config,
                             double hot_threshold = std::numeric_limits<double>::quiet_NaN(),
                             int move_budget = -1);

// Number of junctions with a turning angle above 2pi/3.
int count_sharp_turns(const std::vector<double>& angles);

// 10 degree buckets over [0, 180]; the last bucket includes 180.
std::vector<int> turning_angle_histogram(const std::vector<double>& angles);

}  // namespace qpath
