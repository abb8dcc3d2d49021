#include "qpath/models.hpp"

#include "qpath/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace qpath {

Graph dome_wireframe(double radius, double height, int rings, int segments) {
  if (rings < 1 || segments < 3) throw ArgumentError("dome needs rings >= 1 and segments >= 3");
  if (!(radius > 0.0 && height > 0.0 && height <= radius)) {
    throw ArgumentError("dome needs 0 < height <= radius");
  }
  // Sphere of radius R_s through the base circle and the apex.
  const double rs = (radius * radius + height * height) / (2.0 * height);
  const double zc = height - rs;  // centre below the plate
  const double base_angle = std::asin(radius / rs);
  std::vector<Vec3> pos;
  for (int r = 0; r < rings; ++r) {
    const double polar = base_angle * (1.0 - static_cast<double>(r) / rings);
    const double twist = (r % 2) * std::numbers::pi / segments;
    for (int s = 0; s < segments; ++s) {
      const double az = 2.0 * std::numbers::pi * s / segments + twist;
      pos.emplace_back(rs * std::sin(polar) * std::cos(az), rs * std::sin(polar) * std::sin(az),
                       r == 0 ? 0.0 : zc + rs * std::cos(polar));
    }
  }
  const int apex = static_cast<int>(pos.size());
  pos.emplace_back(0.0, 0.0, height);

  std::vector<std::pair<NodeId, NodeId>> edges;
  auto at = [segments](int r, int s) { return r * segments + ((s % segments) + segments) % segments; };
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      edges.emplace_back(at(r, s), at(r, s + 1));
      if (r + 1 < rings) {
        // Odd rings are twisted by half a segment, so each upper node sits
        // between two lower ones.
        const int shift = r % 2;
        edges.emplace_back(at(r, s), at(r + 1, s - 1 + shift));
        edges.emplace_back(at(r, s), at(r + 1, s + shift));
      }
    }
  }
  for (int s = 0; s < segments; ++s) edges.emplace_back(at(rings - 1, s), apex);
  return Graph(std::move(pos), edges);
}

Graph triangle_grid(int cols, int rows, double pitch) {
  if (cols < 2 || rows < 2 || !(pitch > 0.0)) throw ArgumentError("triangle grid needs 2x2 nodes");
  std::vector<Vec3> pos;
  const double dy = pitch * std::sqrt(3.0) / 2.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) pos.emplace_back((c + 0.5 * (r % 2)) * pitch, r * dy, 0.0);
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) {
        // Up-left and up-right neighbours depend on the row parity.
        const int left = r % 2 ? c : c - 1;
        if (left >= 0) edges.emplace_back(id(r, c), id(r + 1, left));
        if (left + 1 < cols) edges.emplace_back(id(r, c), id(r + 1, left + 1));
      }
    }
  }
  return Graph(std::move(pos), edges);
}

Graph honeycomb_grid(int cols, int rows, double pitch) {
  if (cols < 1 || rows < 1 || !(pitch > 0.0)) throw ArgumentError("honeycomb needs one cell");
  // Pointy-top hexagons; corners are deduplicated on a rounded key.
  std::map<std::pair<long, long>, NodeId> index;
  std::vector<Vec3> pos;
  auto node = [&](double x, double y) {
    const std::pair<long, long> key{std::lround(x * 1e6), std::lround(y * 1e6)};
    const auto it = index.find(key);
    if (it != index.end()) return it->second;
    const NodeId v = static_cast<NodeId>(pos.size());
    index.emplace(key, v);
    pos.emplace_back(x, y, 0.0);
    return v;
  };
  std::map<std::pair<NodeId, NodeId>, bool> seen;
  std::vector<std::pair<NodeId, NodeId>> edges;
  const double w = std::sqrt(3.0) * pitch;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double cx = c * w + (r % 2) * w / 2.0;
      const double cy = r * 1.5 * pitch;
      NodeId corner[6];
      for (int k = 0; k < 6; ++k) {
        const double a = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
        corner[k] = node(cx + pitch * std::cos(a), cy + pitch * std::sin(a));
      }
      for (int k = 0; k < 6; ++k) {
        const NodeId a = corner[k], b = corner[(k + 1) % 6];
        if (seen.emplace(std::make_pair(std::min(a, b), std::max(a, b)), true).second) {
          edges.emplace_back(a, b);
        }
      }
    }
  }
  return Graph(std::move(pos), edges);
}

std::vector<std::uint8_t> filled_mask(int width, int height) {
  if (width < 1 || height < 1) throw ArgumentError("mask needs positive size");
  return std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1);
}

Toolpath zigzag_toolpath(const Graph& graph) {
  std::map<long, std::vector<NodeId>, std::greater<>> rows;
  const double unit = std::max(graph.mean_edge_length(), 1e-9) * 1e-3;
  for (const auto& n : graph.nodes()) rows[std::lround(n.position.y() / unit)].push_back(n.id);
  Toolpath path;
  bool forward = true;
  for (auto& [y, ids] : rows) {
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
      return graph.position(a).x() < graph.position(b).x();
    });
    if (!forward) std::reverse(ids.begin(), ids.end());
    forward = !forward;
    for (NodeId v : ids) {
      ToolpathStep s;
      s.node = v;
      s.is_jump = !path.steps.empty() && !graph.find_edge(path.steps.back().node, v);
      path.steps.push_back(s);
    }
  }
  return path;
}

}  // namespace qpath
