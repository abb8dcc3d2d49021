#pragma once

#include "qpath/graph.hpp"
#include "qpath/planner.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qpath {

// Graph files: JSON {"version": 1, "units": "mm", "nodes": [[x,y,z]...],
// "edges": [[i,j]...]}, or OBJ where "v" lines are nodes and "l"/"f"
// elements contribute edges (1-based, negative indices count from the end).
// `source` only labels errors.
Graph parse_graph_json(std::istream& in, const std::string& source = "<json>");
Graph parse_graph_obj(std::istream& in, const std::string& source = "<obj>");
// Dispatches on the extension: .obj is OBJ, anything else JSON.
Graph parse_graph(const std::string& path);
void write_graph_json(std::ostream& out, const Graph& graph);

// PGM (P2 or P5) raster; every pixel > 0 becomes a node at its pixel
// centre, 4-adjacent foreground pixels are joined. Row 0 is the top row.
Graph parse_pgm_grid(std::istream& in, double pixel_pitch, const std::string& source = "<pgm>");
Graph parse_pgm_grid(const std::string& path, double pixel_pitch);
// Writes an ASCII P2 image of a row-major 0/1 mask.
void write_pgm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& mask);

std::string to_string(PlannerAlgo algo);

// Resolved configuration as a JSON text (seed excluded) and its FNV-1a hash.
std::string config_json(const PlanConfig& cfg, int indent = -1);
std::uint64_t config_hash(const PlanConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

struct ToolpathHeader {
  CoverageMode mode = CoverageMode::kWireframe;
  std::string algo = "dqn";
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  NodeId start = -1;
  int run = 0;
  // totals
  int steps = 0;
  int jumps = 0;
  double length = 0.0;
  double jump_length = 0.0;
  double objective = 0.0;
};

struct ToolpathFile {
  ToolpathHeader header;
  Toolpath path;
  std::vector<Vec3> positions;  // per step
};

ToolpathFile make_toolpath_file(const Graph& graph, const PlanConfig& cfg, const PlanResult& r,
                                const std::string& algo = "dqn");
// Step wall-clock times are not written, which keeps the bytes a function
// of inputs and seed alone.
void write_toolpath(std::ostream& out, const ToolpathFile& file);
ToolpathFile read_toolpath(std::istream& in, const std::string& source = "<toolpath>");

// Reports. Output bytes depend only on the arguments.
void write_report_csv(std::ostream& out, const PlanResult& r, CoverageMode mode);
void write_report_json(std::ostream& out, const Graph& graph, const PlanConfig& cfg,
                       const PlanResult& r, const std::string& algo = "dqn");
void write_report_svg(std::ostream& out, const Graph& graph, const PlanResult& r,
                      CoverageMode mode);

// Reads or writes a whole file; throws ArgumentError on I/O failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace qpath
