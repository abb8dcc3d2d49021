#include "qpath/io.hpp"

#include "qpath/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace qpath {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kUmaxLimit = 1.0;  // mm

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// NaN has no JSON form; it travels as null.
ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

double num_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Graph build_checked(std::vector<Vec3> pos, std::vector<std::pair<NodeId, NodeId>> edges,
                    const std::vector<std::string>& where, const std::string& source) {
  std::set<std::pair<NodeId, NodeId>> seen;
  const int n = static_cast<int>(pos.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [a, b] = edges[k];
    if (a < 0 || b < 0 || a >= n || b >= n) throw ParseError("node index out of range", source + ":" + where[k]);
    if (a == b) throw ParseError("self loop", source + ":" + where[k]);
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
      throw ParseError("duplicate edge", source + ":" + where[k]);
    }
  }
  try {
    return Graph(std::move(pos), edges);
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), source);
  }
}

}  // namespace

Graph parse_graph_json(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), source);
  }
  auto field = [&](const char* name) -> const json& {
    if (!doc.is_object() || !doc.contains(name)) throw ParseError("missing field", source + ":" + name);
    return doc[name];
  };
  const json& version = field("version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw ParseError("unsupported version (expected 1)", source + ":version");
  }
  if (doc.contains("units") && doc["units"] != "mm") {
    throw ParseError("units must be \"mm\"", source + ":units");
  }
  std::vector<Vec3> pos;
  const json& nodes = field("nodes");
  if (!nodes.is_array()) throw ParseError("must be an array", source + ":nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json& p = nodes[i];
    if (!p.is_array() || p.size() != 3 || !std::all_of(p.begin(), p.end(), [](const json& x) { return x.is_number(); })) {
      throw ParseError("expected [x, y, z]", source + ":nodes[" + std::to_string(i) + "]");
    }
    pos.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::string> where;
  const json& es = field("edges");
  if (!es.is_array()) throw ParseError("must be an array", source + ":edges");
  for (std::size_t k = 0; k < es.size(); ++k) {
    const json& e = es[k];
    const std::string at = "edges[" + std::to_string(k) + "]";
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError("expected [i, j]", source + ":" + at);
    }
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    where.push_back(at);
  }
  return build_checked(std::move(pos), std::move(edges), where, source);
}

Graph parse_graph_obj(std::istream& in, const std::string& source) {
  std::vector<Vec3> pos;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::string> where;
  std::set<std::pair<NodeId, NodeId>> face_edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string at = "line " + std::to_string(lineno);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError("vertex needs three coordinates", source + ":" + at);
      pos.emplace_back(x, y, z);
    } else if (tag == "l" || tag == "f") {
      std::vector<NodeId> ids;
      std::string tok;
      while (ls >> tok) {
        int k;
        try {
          k = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          throw ParseError("bad index '" + tok + "'", source + ":" + at);
        }
        if (k == 0) throw ParseError("index 0 is invalid", source + ":" + at);
        ids.push_back(k > 0 ? k - 1 : static_cast<int>(pos.size()) + k);
      }
      if (ids.size() < 2) throw ParseError("element needs two indices", source + ":" + at);
      if (tag == "f") {
        if (ids.size() < 3) throw ParseError("face needs three indices", source + ":" + at);
        ids.push_back(ids.front());
      }
      for (std::size_t t = 1; t < ids.size(); ++t) {
        const NodeId a = ids[t - 1], b = ids[t];
        // Faces share edges by construction; only line elements may not repeat.
        if (tag == "f") {
          if (!face_edges.emplace(std::min(a, b), std::max(a, b)).second) continue;
          if (std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end() ||
              std::find(edges.begin(), edges.end(), std::make_pair(b, a)) != edges.end()) {
            continue;
          }
        }
        edges.emplace_back(a, b);
        where.push_back(at);
      }
    }
  }
  // Drop face edges that repeat an earlier line element.
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<std::pair<NodeId, NodeId>> kept;
  std::vector<std::string> kept_where;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto key = std::make_pair(std::min(edges[k].first, edges[k].second),
                                    std::max(edges[k].first, edges[k].second));
    if (face_edges.count(key) && seen.count(key)) continue;
    seen.insert(key);
    kept.push_back(edges[k]);
    kept_where.push_back(where[k]);
  }
  return build_checked(std::move(pos), std::move(kept), kept_where, source);
}

Graph parse_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  return lower_ext(path) == "obj" ? parse_graph_obj(in, path) : parse_graph_json(in, path);
}

void write_graph_json(std::ostream& out, const Graph& graph) {
  ordered_json doc;
  doc["version"] = 1;
  doc["units"] = "mm";
  ordered_json nodes = ordered_json::array();
  for (const auto& n : graph.nodes()) nodes.push_back({n.position.x(), n.position.y(), n.position.z()});
  ordered_json edges = ordered_json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.a, e.b});
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  out << doc.dump() << '\n';
}

namespace {

// Next header token of a PGM file, skipping whitespace and comments.
std::string pgm_token(std::istream& in, const std::string& source) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) return tok;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
    } else {
      tok.push_back(c);
    }
  }
  if (tok.empty()) throw ParseError("truncated header", source);
  return tok;
}

int pgm_int(std::istream& in, const std::string& source, const char* what) {
  const std::string tok = pgm_token(in, source);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", source);
  }
}

}  // namespace

Graph parse_pgm_grid(std::istream& in, double pixel_pitch, const std::string& source) {
  if (!(pixel_pitch > 0.0)) throw ArgumentError("pixel pitch must be positive");
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) {
    throw ParseError("not a P2/P5 PGM file", source);
  }
  const int width = pgm_int(in, source, "width");
  const int height = pgm_int(in, source, "height");
  const int maxval = pgm_int(in, source, "maxval");
  if (width < 1 || height < 1) throw ParseError("empty image", source);
  if (maxval < 1 || maxval > 65535) throw ParseError("maxval out of range", source);
  // pgm_token consumed exactly one whitespace byte after maxval.

  std::vector<std::uint8_t> fg(static_cast<std::size_t>(width) * height, 0);
  for (std::size_t k = 0; k < fg.size(); ++k) {
    int v;
    if (magic[1] == '2') {
      if (!(in >> v)) throw ParseError("truncated pixel data", source);
    } else if (maxval < 256) {
      const int c = in.get();
      if (c == EOF) throw ParseError("truncated pixel data", source);
      v = c;
    } else {
      const int hi = in.get(), lo = in.get();
      if (lo == EOF || hi == EOF) throw ParseError("truncated pixel data", source);
      v = (hi << 8) | lo;
    }
    if (v > maxval) throw ParseError("pixel exceeds maxval", source);
    fg[k] = v > 0 ? 1 : 0;
  }

  std::vector<int> id(fg.size(), -1);
  std::vector<Vec3> pos;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!fg[r * width + c]) continue;
      id[r * width + c] = static_cast<int>(pos.size());
      pos.emplace_back((c + 0.5) * pixel_pitch, (height - r - 0.5) * pixel_pitch, 0.0);
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int a = id[r * width + c];
      if (a < 0) continue;
      if (c + 1 < width && id[r * width + c + 1] >= 0) edges.emplace_back(a, id[r * width + c + 1]);
      if (r + 1 < height && id[(r + 1) * width + c] >= 0) edges.emplace_back(a, id[(r + 1) * width + c]);
    }
  }
  return Graph(std::move(pos), edges);
}

Graph parse_pgm_grid(const std::string& path, double pixel_pitch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file", path);
  return parse_pgm_grid(in, pixel_pitch, path);
}

void write_pgm(std::ostream& out, int width, int height, const std::vector<std::uint8_t>& mask) {
  if (width < 1 || height < 1 || mask.size() != static_cast<std::size_t>(width) * height) {
    throw ArgumentError("write_pgm: mask size does not match the image");
  }
  out << "P2\n" << width << ' ' << height << "\n1\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out << (c ? " " : "") << (mask[r * width + c] ? 1 : 0);
    out << '\n';
  }
}

std::string to_string(PlannerAlgo algo) {
  switch (algo) {
    case PlannerAlgo::kDqn: return "dqn";
    case PlannerAlgo::kBfs: return "bfs";
    case PlannerAlgo::kGreedy: return "greedy";
  }
  return "?";
}

namespace {

ordered_json config_doc(const PlanConfig& cfg) {
  const RewardConfig rc = cfg.reward_config();
  const NetShape sh = cfg.shape();
  ordered_json j;
  j["mode"] = to_string(cfg.mode);
  j["algo"] = to_string(cfg.algo);
  j["lsg_rings"] = cfg.rings;
  j["state_size"] = sh.m;
  j["priors"] = cfg.priors;
  j["reuse_priors"] = cfg.reuse_priors;
  j["history"] = cfg.history;
  j["ordering"] = cfg.ordering == OrderingKind::kPattern ? "pattern" : "raw-id";
  j["restarts"] = cfg.restarts;
  j["max_moves"] = cfg.max_moves;
  j["hot_threshold"] = num(cfg.hot_threshold);
  j["net"] = {{"e2e1", sh.e2e1}, {"e2e2", sh.e2e2}, {"e2n", sh.e2n}, {"hidden", sh.hidden}};
  const LearnConfig& l = cfg.learn;
  j["learn"] = {{"gamma", l.gamma},
                {"eps_start", l.eps_start},
                {"eps_decay", l.eps_decay},
                {"eps_min", l.eps_min},
                {"min_episodes_per_ring", l.min_episodes_per_ring},
                {"patience_per_ring", l.patience_per_ring},
                {"max_episodes", l.max_episodes},
                {"batch", l.batch},
                {"buffer_capacity", l.buffer_capacity},
                {"target_interval", l.target_interval},
                {"updates_per_episode", l.updates_per_episode},
                {"lr", l.adam.lr}};
  ordered_json r;
  r["discount"] = {{"kind", rc.discount.kind == DiscountKind::kGaussian ? "gaussian" : "exponential"},
                   {"sigma", rc.discount.sigma},
                   {"mu", rc.discount.mu}};
  if (cfg.mode == CoverageMode::kWireframe) {
    r["material"] = {{"youngs_pa", rc.material.youngs_pa},
                     {"poisson", rc.material.poisson},
                     {"density", rc.material.density},
                     {"diameter_mm", rc.material.diameter}};
    r["head_mode"] = rc.head_mode == HeadMode::kFixed ? "fixed" : "reorientable";
    r["head_vertices"] = rc.head.vertices.size();
    r["orientation_samples"] = rc.orientation_samples;
    r["grounding_tolerance"] = rc.grounding_tolerance;
    r["unsupported_penalty"] = rc.unsupported_penalty;
  } else if (cfg.mode == CoverageMode::kMetal) {
    r["heat_max"] = rc.heat_max;
    r["heat_radius_factor"] = rc.heat_radius_factor;
    r["diffusion"] = rc.diffusion;
    r["decay"] = rc.decay;
    r["diffusion_rings"] = rc.diffusion_rings;
  }
  j["reward"] = std::move(r);
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string config_json(const PlanConfig& cfg, int indent) { return config_doc(cfg).dump(indent); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const PlanConfig& cfg) { return fnv1a64(config_json(cfg)); }

ToolpathFile make_toolpath_file(const Graph& graph, const PlanConfig& cfg, const PlanResult& r,
                                const std::string& algo) {
  ToolpathFile f;
  f.header.mode = cfg.mode;
  f.header.algo = algo;
  f.header.config_hash = config_hash(cfg);
  f.header.seed = r.seed;
  f.header.start = r.start;
  f.header.run = r.run;
  f.header.steps = static_cast<int>(r.path.steps.size()) - 1;
  f.header.jumps = r.path.jump_count();
  f.header.length = r.path.total_length(graph);
  f.header.jump_length = r.path.jump_length(graph);
  f.header.objective = plan_objective(r, cfg.mode);
  f.path = r.path;
  for (const auto& s : r.path.steps) f.positions.push_back(graph.position(s.node));
  return f;
}

void write_toolpath(std::ostream& out, const ToolpathFile& file) {
  if (file.positions.size() != file.path.steps.size()) {
    throw ArgumentError("toolpath file: one position per step required");
  }
  const ToolpathHeader& h = file.header;
  ordered_json doc;
  doc["format"] = "qpath-toolpath";
  doc["version"] = 1;
  doc["header"] = {{"mode", to_string(h.mode)},
                   {"algo", h.algo},
                   {"config_hash", hex64(h.config_hash)},
                   {"seed", h.seed},
                   {"start", h.start},
                   {"run", h.run},
                   {"totals",
                    {{"steps", h.steps},
                     {"jumps", h.jumps},
                     {"length_mm", num(h.length)},
                     {"jump_length_mm", num(h.jump_length)},
                     {"objective", num(h.objective)}}}};
  ordered_json steps = ordered_json::array();
  for (std::size_t k = 0; k < file.path.steps.size(); ++k) {
    const ToolpathStep& s = file.path.steps[k];
    const Vec3& p = file.positions[k];
    const StepDiagnostics& d = s.diagnostics;
    steps.push_back({{"node", s.node},
                     {"position", {p.x(), p.y(), p.z()}},
                     {"jump", s.is_jump},
                     {"reward", num(s.reward)},
                     {"diagnostics",
                      {{"q_value", num(d.q_value)},
                       {"collision", num(d.collision)},
                       {"u_max", num(d.u_max)},
                       {"temperature", num(d.temperature)},
                       {"turn_angle", num(d.turn_angle)},
                       {"traversal", num(d.traversal)},
                       {"episodes", d.episodes}}}});
  }
  doc["steps"] = std::move(steps);
  out << doc.dump(1) << '\n';
}

ToolpathFile read_toolpath(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), source);
  }
  std::string at = "format";
  try {
    if (doc.at("format") != "qpath-toolpath") throw ParseError("not a toolpath file", source + ":format");
    at = "version";
    if (doc.at("version") != 1) throw ParseError("unsupported version", source + ":version");
    ToolpathFile f;
    at = "header";
    const json& h = doc.at("header");
    f.header.mode = coverage_mode_from_string(h.at("mode").get<std::string>());
    f.header.algo = h.at("algo").get<std::string>();
    f.header.config_hash = std::stoull(h.at("config_hash").get<std::string>(), nullptr, 16);
    f.header.seed = h.at("seed").get<std::uint64_t>();
    f.header.start = h.at("start").get<int>();
    f.header.run = h.at("run").get<int>();
    const json& t = h.at("totals");
    f.header.steps = t.at("steps").get<int>();
    f.header.jumps = t.at("jumps").get<int>();
    f.header.length = num_or_nan(t.at("length_mm"));
    f.header.jump_length = num_or_nan(t.at("jump_length_mm"));
    f.header.objective = num_or_nan(t.at("objective"));
    const json& steps = doc.at("steps");
    for (std::size_t k = 0; k < steps.size(); ++k) {
      at = "steps[" + std::to_string(k) + "]";
      const json& s = steps[k];
      ToolpathStep step;
      step.node = s.at("node").get<int>();
      step.is_jump = s.at("jump").get<bool>();
      step.reward = num_or_nan(s.at("reward"));
      const json& d = s.at("diagnostics");
      step.diagnostics.q_value = num_or_nan(d.at("q_value"));
      step.diagnostics.collision = num_or_nan(d.at("collision"));
      step.diagnostics.u_max = num_or_nan(d.at("u_max"));
      step.diagnostics.temperature = num_or_nan(d.at("temperature"));
      step.diagnostics.turn_angle = num_or_nan(d.at("turn_angle"));
      step.diagnostics.traversal = num_or_nan(d.at("traversal"));
      step.diagnostics.episodes = d.at("episodes").get<int>();
      const json& p = s.at("position");
      f.positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
      f.path.steps.push_back(step);
    }
    return f;
  } catch (const json::exception& e) {
    throw ParseError(e.what(), source + ":" + at);
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), source + ":" + at);
  } catch (const std::logic_error& e) {
    throw ParseError(e.what(), source + ":" + at);
  }
}

namespace {

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

const char* mode_column(CoverageMode mode) {
  switch (mode) {
    case CoverageMode::kWireframe: return "u_max_mm";
    case CoverageMode::kCcf: return "turn_angle_rad";
    case CoverageMode::kMetal: return "temperature";
  }
  return "value";
}

double mode_value(const StepDiagnostics& d, CoverageMode mode) {
  switch (mode) {
    case CoverageMode::kWireframe: return d.u_max;
    case CoverageMode::kCcf: return d.turn_angle;
    case CoverageMode::kMetal: return d.temperature;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void write_report_csv(std::ostream& out, const PlanResult& r, CoverageMode mode) {
  out << "step,node,jump,reward," << mode_column(mode) << ",episodes,wall_ms\n";
  for (std::size_t k = 0; k < r.path.steps.size(); ++k) {
    const ToolpathStep& s = r.path.steps[k];
    out << k << ',' << s.node << ',' << (s.is_jump ? 1 : 0) << ',' << fmt(s.reward) << ','
        << fmt(mode_value(s.diagnostics, mode)) << ',' << s.diagnostics.episodes << ','
        << fmt(s.diagnostics.wall_ms) << '\n';
  }
}

void write_report_json(std::ostream& out, const Graph& graph, const PlanConfig& cfg,
                       const PlanResult& r, const std::string& algo) {
  const PathMetrics& m = r.metrics;
  ordered_json doc;
  doc["algo"] = algo;
  doc["mode"] = to_string(cfg.mode);
  doc["seed"] = r.seed;
  doc["start"] = r.start;
  doc["run"] = r.run;
  doc["config_hash"] = hex64(config_hash(cfg));
  doc["nodes"] = graph.node_count();
  doc["edges"] = graph.edge_count();
  doc["complete"] = m.complete;
  doc["steps"] = m.steps;
  doc["jumps"] = m.jumps;
  doc["length_mm"] = num(m.total_length);
  doc["jump_length_mm"] = num(m.jump_length);
  doc["objective"] = num(plan_objective(r, cfg.mode));
  doc["wall_ms"] = num(r.wall_ms);
  if (cfg.mode == CoverageMode::kWireframe) {
    ordered_json series = ordered_json::array();
    int over = 0;
    for (double u : m.u_max_series) {
      series.push_back(num(u));
      over += u > kUmaxLimit ? 1 : 0;
    }
    doc["peak_u_max_mm"] = num(m.peak_u_max);
    doc["u_max_limit_mm"] = kUmaxLimit;
    doc["u_max_over_limit"] = over;
    doc["u_max_series_mm"] = std::move(series);
    doc["collisions"] = m.collisions;
    doc["unsupported"] = m.unsupported;
  } else if (cfg.mode == CoverageMode::kCcf) {
    doc["sharp_turns"] = m.sharp_turns;
    doc["double_traversals"] = m.double_traversals;
    doc["turning_angle_histogram_10deg"] = turning_angle_histogram(m.turn_angles);
  } else {
    doc["hot_threshold"] = num(m.hot_threshold);
    doc["peak_hot_area"] = m.peak_hot_area;
    doc["hot_area_integral"] = num(m.hot_area_integral);
  }
  ordered_json lsgs = ordered_json::array();
  for (const auto& l : r.lsgs) {
    lsgs.push_back({{"center", l.center},
                    {"size", l.lsg_size},
                    {"episodes", l.episodes},
                    {"from_prior", l.from_prior},
                    {"best_total", num(l.best_total)}});
  }
  doc["lsgs"] = std::move(lsgs);
  out << doc.dump(1) << '\n';
}

void write_report_svg(std::ostream& out, const Graph& graph, const PlanResult& r,
                      CoverageMode mode) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& n : graph.nodes()) {
    x0 = std::min(x0, n.position.x());
    x1 = std::max(x1, n.position.x());
    y0 = std::min(y0, n.position.y());
    y1 = std::max(y1, n.position.y());
  }
  if (graph.node_count() == 0) x0 = y0 = x1 = y1 = 0.0;
  const double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double size = 800.0, pad = 20.0, s = (size - 2 * pad) / span;
  auto px = [&](const Vec3& p) { return pad + (p.x() - x0) * s; };
  auto py = [&](const Vec3& p) { return size - pad - (p.y() - y0) * s; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size) << "\" height=\""
      << fmt(size) << "\" viewBox=\"0 0 " << fmt(size) << ' ' << fmt(size) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  for (const auto& e : graph.edges()) {
    const Vec3 &a = graph.position(e.a), &b = graph.position(e.b);
    out << "<line x1=\"" << fmt(px(a)) << "\" y1=\"" << fmt(py(a)) << "\" x2=\"" << fmt(px(b))
        << "\" y2=\"" << fmt(py(b)) << "\"/>\n";
  }
  out << "</g>\n";

  if (mode == CoverageMode::kMetal && !r.metrics.final_temperatures.empty()) {
    const auto& t = r.metrics.final_temperatures;
    const double tmax = std::max(*std::max_element(t.begin(), t.end()), 1e-12);
    out << "<g>\n";
    for (int v = 0; v < graph.node_count(); ++v) {
      const int red = static_cast<int>(std::lround(255.0 * std::clamp(t[v] / tmax, 0.0, 1.0)));
      out << "<circle cx=\"" << fmt(px(graph.position(v))) << "\" cy=\"" << fmt(py(graph.position(v)))
          << "\" r=\"3\" fill=\"rgb(" << red << ",0," << 255 - red << ")\"/>\n";
    }
    out << "</g>\n";
  }

  // Toolpath: deposited moves solid, shaded from blue (early) to red (late);
  // jumps dashed grey.
  const std::size_t n = r.path.steps.size();
  out << "<g stroke-width=\"2\" fill=\"none\">\n";
  for (std::size_t k = 1; k < n; ++k) {
    const Vec3& a = graph.position(r.path.steps[k - 1].node);
    const Vec3& b = graph.position(r.path.steps[k].node);
    out << "<line x1=\"" << fmt(px(a)) << "\" y1=\"" << fmt(py(a)) << "\" x2=\"" << fmt(px(b))
        << "\" y2=\"" << fmt(py(b)) << "\"";
    if (r.path.steps[k].is_jump) {
      out << " stroke=\"#888888\" stroke-dasharray=\"4 3\"";
    } else {
      const int red = static_cast<int>(255 * k / std::max<std::size_t>(n - 1, 1));
      out << " stroke=\"rgb(" << red << ",40," << 255 - red << ")\"";
    }
    out << "/>\n";
  }
  out << "</g>\n";
  if (n > 0) {
    const Vec3& p = graph.position(r.path.steps.front().node);
    out << "<circle cx=\"" << fmt(px(p)) << "\" cy=\"" << fmt(py(p))
        << "\" r=\"5\" fill=\"green\"/>\n";
  }
  out << "</svg>\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out << bytes;
  if (!out) throw ArgumentError("failed writing " + path);
}

}  // namespace qpath
