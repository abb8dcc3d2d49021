#pragma once

#include "qpath/graph.hpp"

#include <cstdint>
#include <vector>

namespace qpath {

// Bundled test geometry. All sizes in mm.

// Spherical-cap lattice: `rings` horizontal rings of `segments` nodes plus an
// apex, with ring, meridian and diagonal struts. The base ring sits on z = 0.
Graph dome_wireframe(double radius, double height, int rings, int segments);

// Triangulated rectangle of cols x rows nodes; odd rows are offset by half
// a pitch so that interior nodes have valence 6.
Graph triangle_grid(int cols, int rows, double pitch);

// Honeycomb of cols x rows hexagonal cells with edge length `pitch`.
Graph honeycomb_grid(int cols, int rows, double pitch);

// Row-major 0/1 mask of a filled width x height rectangle.
std::vector<std::uint8_t> filled_mask(int width, int height);

// Boustrophedon scan of a raster graph: rows of equal y from the top,
// alternating direction, joined by a move where the row ends are adjacent and
// by a jump otherwise. Every node appears once.
Toolpath zigzag_toolpath(const Graph& graph);

}  // namespace qpath
