#include "doctest.h"

#include "meshes.hpp"
#include "qpath/errors.hpp"
#include "qpath/io.hpp"
#include "qpath/models.hpp"

#include <cmath>
#include <sstream>

using namespace qpath;

namespace {

Graph json_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_graph_json(in);
}

Graph obj_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_graph_obj(in);
}

Graph pgm_graph(const std::string& text, double pitch = 1.0) {
  std::istringstream in(text);
  return parse_pgm_grid(in, pitch);
}

std::string parse_error_location(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.location();
  }
  return "no error";
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("graph json") {
  const Graph g = json_graph(R"({"version": 1, "units": "mm", "nodes": [[0,0,0],[1,0,0]], "edges": [[0,1]]})");
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);

  CHECK(parse_error_location([] {
          json_graph(R"({"version": 1, "nodes": [[0,0,0],[1,0,0]], "edges": [[0,1],[1,0]]})");
        }) == "<json>:edges[1]");
  CHECK(parse_error_location([] { json_graph(R"({"version": 2, "nodes": [], "edges": []})"); }) ==
        "<json>:version");
  CHECK(parse_error_location([] { json_graph(R"({"version": 1, "edges": []})"); }) == "<json>:nodes");
  CHECK(parse_error_location([] {
          json_graph(R"({"version": 1, "nodes": [[0,0]], "edges": []})");
        }) == "<json>:nodes[0]");
  CHECK(parse_error_location([] {
          json_graph(R"({"version": 1, "nodes": [[0,0,0]], "edges": [[0,3]]})");
        }) == "<json>:edges[0]");
  CHECK(parse_error_location([] {
          json_graph(R"({"version": 1, "units": "inch", "nodes": [], "edges": []})");
        }) == "<json>:units");
  CHECK_THROWS_AS(json_graph("{not json"), ParseError);

  // Writing and parsing again keeps every coordinate bit for bit.
  const Graph d = dome_wireframe(30.0, 18.0, 3, 10);
  std::ostringstream out;
  write_graph_json(out, d);
  const Graph back = json_graph(out.str());
  REQUIRE(back.node_count() == d.node_count());
  REQUIRE(back.edge_count() == d.edge_count());
  for (int v = 0; v < d.node_count(); ++v) CHECK(back.position(v) == d.position(v));
  for (int e = 0; e < d.edge_count(); ++e) {
    CHECK(back.edge(e).a == d.edge(e).a);
    CHECK(back.edge(e).b == d.edge(e).b);
  }
}

TEST_CASE("graph obj") {
  const Graph g = obj_graph("# two struts\nv 0 0 0\nv 1 0 0\nv 1 1 0\nl 1 2\nl -1 -2\n");
  CHECK(g.node_count() == 3);
  REQUIRE(g.edge_count() == 2);
  CHECK(g.find_edge(0, 1));
  CHECK(g.find_edge(1, 2));

  // Faces contribute their boundary once per shared edge.
  const Graph f = obj_graph("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2/1 4/2 3/3\nl 1 2\n");
  CHECK(f.edge_count() == 5);

  CHECK(parse_error_location([] { obj_graph("v 0 0 0\nv 1 0 0\nl 1 2\nl 2 1\n"); }) ==
        "<obj>:line 4");
  CHECK(parse_error_location([] { obj_graph("v 0 0\n"); }) == "<obj>:line 1");
  CHECK(parse_error_location([] { obj_graph("v 0 0 0\nl 1 x\n"); }) == "<obj>:line 2");
  CHECK(parse_error_location([] { obj_graph("v 0 0 0\nl 1 5\n"); }) == "<obj>:line 2");
}

TEST_CASE("pgm grids") {
  const Graph one = pgm_graph("P2\n1 1\n255\n200\n");
  CHECK(one.node_count() == 1);
  CHECK(one.edge_count() == 0);
  CHECK(one.position(0) == Vec3(0.5, 0.5, 0.0));

  const Graph four = pgm_graph("P2 # comment\n2 2\n1\n1 1\n1 1\n", 2.0);
  CHECK(four.node_count() == 4);
  CHECK(four.edge_count() == 4);
  CHECK(four.position(0) == Vec3(1.0, 3.0, 0.0));  // top-left pixel

  const Graph checker = pgm_graph("P2\n4 4\n1\n1 0 1 0\n0 1 0 1\n1 0 1 0\n0 1 0 1\n");
  CHECK(checker.node_count() == 8);
  CHECK(checker.edge_count() == 0);

  std::string p5 = "P5\n3 1\n255\n";
  p5 += std::string{'\x05', '\x00', '\xff'};
  const Graph bin = pgm_graph(p5);
  CHECK(bin.node_count() == 2);
  CHECK(bin.edge_count() == 0);

  CHECK_THROWS_AS(pgm_graph("P3\n1 1\n1\n1\n"), ParseError);
  CHECK_THROWS_AS(pgm_graph("P2\n2 x\n1\n"), ParseError);
  CHECK_THROWS_AS(pgm_graph("P2\n2 2\n1\n1 1 1\n"), ParseError);
  CHECK_THROWS_AS(pgm_graph("P2\n1 1\n1\n7\n"), ParseError);

  std::ostringstream out;
  write_pgm(out, 60, 60, filled_mask(60, 60));
  const Graph full = pgm_graph(out.str());
  CHECK(full.node_count() == 3600);
  CHECK(full.edge_count() == 2 * 60 * 59);
}

TEST_CASE("bundled generators") {
  const Graph dome = dome_wireframe(30.0, 18.0, 4, 16);
  CHECK(dome.node_count() == 4 * 16 + 1);
  CHECK(dome.edge_count() == 4 * 16 + 2 * 16 * 3 + 16);
  CHECK(dome.component_count() == 1);
  CHECK(dome.min_z() == 0.0);

  const Graph tri = triangle_grid(7, 5, 2.0);
  CHECK(tri.node_count() == 35);
  CHECK(tri.edge_count() == 5 * 6 + 4 * (2 * 7 - 1));
  for (const auto& e : tri.edges()) CHECK(e.length == doctest::Approx(2.0));

  const Graph hex1 = honeycomb_grid(1, 1, 1.0);
  CHECK(hex1.node_count() == 6);
  CHECK(hex1.edge_count() == 6);
  const Graph hex2 = honeycomb_grid(2, 1, 1.0);
  CHECK(hex2.node_count() == 10);
  CHECK(hex2.edge_count() == 11);
  const Graph hex = honeycomb_grid(10, 10, 3.0);
  CHECK(hex.component_count() == 1);
  CHECK(hex.max_degree() == 3);

  const Graph raster = pgm_graph("P2\n3 2\n1\n1 1 1\n1 1 1\n");
  const Toolpath z = zigzag_toolpath(raster);
  REQUIRE(z.steps.size() == 6);
  CHECK(z.jump_count() == 0);
  z.check_continuity(raster);
  std::vector<NodeId> order;
  for (const auto& s : z.steps) order.push_back(s.node);
  CHECK(order == std::vector<NodeId>{0, 1, 2, 5, 4, 3});
}

TEST_CASE("fnv1a and config hash") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  PlanConfig a;
  PlanConfig b = a;
  b.seed = 99;
  CHECK(config_hash(a) == config_hash(b));
  b.rings = 3;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("toolpath file round trip and report determinism") {
  const Graph g = meshes::tri_patch(2);
  PlanConfig cfg;
  cfg.mode = CoverageMode::kCcf;
  cfg.algo = PlannerAlgo::kGreedy;
  const PlanResult r = plan_toolpath(g, cfg);
  const ToolpathFile f = make_toolpath_file(g, cfg, r, "greedy");
  CHECK(f.header.steps == static_cast<int>(r.path.steps.size()) - 1);

  std::ostringstream out;
  write_toolpath(out, f);
  std::istringstream in(out.str());
  const ToolpathFile back = read_toolpath(in);
  CHECK(back.header.mode == f.header.mode);
  CHECK(back.header.algo == "greedy");
  CHECK(back.header.config_hash == f.header.config_hash);
  CHECK(back.header.seed == f.header.seed);
  CHECK(back.header.length == f.header.length);
  REQUIRE(back.path.steps.size() == f.path.steps.size());
  for (std::size_t k = 0; k < f.path.steps.size(); ++k) {
    const auto &a = f.path.steps[k], &b = back.path.steps[k];
    CHECK(a.node == b.node);
    CHECK(a.is_jump == b.is_jump);
    CHECK(same_double(a.reward, b.reward));
    CHECK(same_double(a.diagnostics.q_value, b.diagnostics.q_value));
    CHECK(same_double(a.diagnostics.turn_angle, b.diagnostics.turn_angle));
    CHECK(same_double(a.diagnostics.traversal, b.diagnostics.traversal));
    CHECK(same_double(a.diagnostics.u_max, b.diagnostics.u_max));
    CHECK(a.diagnostics.episodes == b.diagnostics.episodes);
    CHECK(back.positions[k] == f.positions[k]);
  }
  std::ostringstream again;
  write_toolpath(again, back);
  CHECK(again.str() == out.str());

  std::istringstream bad(R"({"format": "qpath-toolpath", "version": 1, "header": {}})");
  CHECK_THROWS_AS(read_toolpath(bad), ParseError);

  for (int pass = 0; pass < 2; ++pass) {
    std::ostringstream c1, c2, j1, j2, s1, s2;
    write_report_csv(c1, r, cfg.mode);
    write_report_csv(c2, r, cfg.mode);
    write_report_json(j1, g, cfg, r);
    write_report_json(j2, g, cfg, r);
    write_report_svg(s1, g, r, cfg.mode);
    write_report_svg(s2, g, r, cfg.mode);
    CHECK(c1.str() == c2.str());
    CHECK(j1.str() == j2.str());
    CHECK(s1.str() == s2.str());
    CHECK(c1.str().rfind("step,node,jump,reward,turn_angle_rad,episodes,wall_ms\n", 0) == 0);
    CHECK(j1.str().find("turning_angle_histogram_10deg") != std::string::npos);
  }
}
