// Command-line front end: plan, baseline, compare, report, generate.
#include "qpath/baselines.hpp"
#include "qpath/errors.hpp"
#include "qpath/io.hpp"
#include "qpath/models.hpp"
#include "qpath/planner.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace qpath;

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitParse = 3;

struct Common {
  std::string graph_path;
  std::string mode = "wireframe";
  double pitch = 1.0;  // PGM pixel pitch, mm
  int rings = 6;
  std::uint64_t seed = 1;
  int priors = 10;
  int restarts = 1;
  int threads = 0;
  bool no_reuse = false;
  bool no_history = false;
  std::string head = "fixed";
  double hot_threshold = std::numeric_limits<double>::quiet_NaN();
  int max_episodes = 500;
  int updates = 0;
  double lr = 1e-3;
  std::string out;            // toolpath file
  std::string report_prefix;  // writes <prefix>.json/.csv/.svg
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("graph", c.graph_path, "graph file (.json, .obj or .pgm)")->required();
  app->add_option("--mode", c.mode, "wireframe | ccf | metal")
      ->check(CLI::IsMember({"wireframe", "ccf", "metal"}));
  app->add_option("--pitch", c.pitch, "PGM pixel pitch in mm");
  app->add_option("--lsg-rings", c.rings, "LSG ring count n (lookahead length)");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--priors", c.priors, "prior store capacity K");
  app->add_option("--restarts", c.restarts, "independent runs from distinct start nodes");
  app->add_option("--threads", c.threads, "worker threads (0: QPATH_THREADS or 1)");
  app->add_flag("--no-reuse", c.no_reuse, "start each LSG from the previous LSG's network instead of the prior store");
  app->add_flag("--no-history", c.no_history, "drop the two history channels");
  app->add_option("--head", c.head, "wireframe head: fixed | reorientable")
      ->check(CLI::IsMember({"fixed", "reorientable"}));
  app->add_option("--hot-threshold", c.hot_threshold, "metal hot-area temperature threshold");
  app->add_option("--max-episodes", c.max_episodes, "episode cap per LSG");
  app->add_option("--updates-per-episode", c.updates, "minibatch updates after each episode (0: one per transition)");
  app->add_option("--lr", c.lr, "Adam learning rate");
  app->add_option("--out", c.out, "toolpath file to write");
  app->add_option("--report", c.report_prefix, "write <prefix>.json, .csv and .svg reports");
}

Graph load_graph(const Common& c) {
  const std::filesystem::path p(c.graph_path);
  if (p.extension() == ".pgm") return parse_pgm_grid(c.graph_path, c.pitch);
  return parse_graph(c.graph_path);
}

PlanConfig make_config(const Common& c) {
  PlanConfig cfg;
  cfg.mode = coverage_mode_from_string(c.mode);
  cfg.rings = c.rings;
  cfg.seed = c.seed;
  cfg.priors = c.priors;
  cfg.restarts = c.restarts;
  cfg.reuse_priors = !c.no_reuse;
  cfg.history = !c.no_history;
  cfg.reward.head_mode = c.head == "fixed" ? HeadMode::kFixed : HeadMode::kReorientable;
  cfg.hot_threshold = c.hot_threshold;
  cfg.learn.max_episodes = c.max_episodes;
  cfg.learn.updates_per_episode = c.updates;
  cfg.learn.adam.lr = c.lr;
  cfg.validate();
  return cfg;
}

void print_config(const PlanConfig& cfg, const Graph& g, int threads) {
  std::cout << "graph: " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
  std::cout << "seed: " << cfg.seed << "\n";
  std::cout << "threads: " << threads << "\n";
  std::cout << "config: " << config_json(cfg) << "\n";
  std::cout << "config_hash: " << std::hex << config_hash(cfg) << std::dec << "\n";
}

void print_summary(const PlanConfig& cfg, const PlanResult& r,
                   const std::string& algo) {
  const PathMetrics& m = r.metrics;
  std::cout << algo << ": start " << r.start << ", run " << r.run << ", " << m.steps << " moves, "
            << m.jumps << " jumps, length " << m.total_length << " mm";
  switch (cfg.mode) {
    case CoverageMode::kWireframe:
      std::cout << ", peak u_max " << m.peak_u_max << " mm, collisions " << m.collisions;
      break;
    case CoverageMode::kCcf:
      std::cout << ", sharp turns " << m.sharp_turns << ", double traversals "
                << m.double_traversals;
      break;
    case CoverageMode::kMetal:
      std::cout << ", peak hot area " << m.peak_hot_area << " (T > " << m.hot_threshold << ")";
      break;
  }
  std::cout << ", " << r.wall_ms / 1000.0 << " s\n";
}

void write_outputs(const Common& c, const Graph& g, const PlanConfig& cfg, const PlanResult& r,
                   const std::string& algo) {
  if (!c.out.empty()) {
    std::ostringstream s;
    write_toolpath(s, make_toolpath_file(g, cfg, r, algo));
    write_file(c.out, s.str());
    std::cout << "toolpath: " << c.out << "\n";
  }
  if (!c.report_prefix.empty()) {
    std::ostringstream j, v, s;
    write_report_json(j, g, cfg, r, algo);
    write_report_csv(v, r, cfg.mode);
    write_report_svg(s, g, r, cfg.mode);
    write_file(c.report_prefix + ".json", j.str());
    write_file(c.report_prefix + ".csv", v.str());
    write_file(c.report_prefix + ".svg", s.str());
    std::cout << "reports: " << c.report_prefix << ".{json,csv,svg}\n";
  }
}

PlanResult run_dqn(const Common& c, const Graph& g, const PlanConfig& cfg, int threads) {
  if (c.restarts > 1) {
    const RestartResult rr = plan_with_restarts(g, cfg, threads);
    for (const auto& run : rr.runs) {
      std::cout << "run " << run.run << " start " << run.start << ": "
                << (run.feasible ? "objective " + std::to_string(run.objective) : run.failure)
                << "\n";
    }
    return rr.best;
  }
  return plan_toolpath(g, cfg);
}

// Baseline planners share the restart and start-node logic.
struct BaselineOut {
  PlanResult result;
  bool dfs_complete = true;
  long long dfs_expansions = 0;
};

BaselineOut run_baseline(const std::string& algo, const Graph& g, PlanConfig cfg, int threads,
                         long long budget) {
  BaselineOut out;
  if (algo == "dfs") {
    const NodeId start = start_set(g, cfg).front();
    const auto proto = make_reward_model(g, cfg.reward_config());
    DfsConstraints k;
    k.budget = budget;
    k.allow_jumps = cfg.mode != CoverageMode::kCcf;
    const DfsResult d = dfs_backtrack_plan(*proto, start, k);
    out.dfs_complete = d.complete;
    out.dfs_expansions = d.expansions;
    out.result.path = d.path;
    out.result.start = start;
    out.result.seed = cfg.seed;
    out.result.metrics = measure_toolpath(g, d.path, cfg.reward_config(), cfg.hot_threshold);
    return out;
  }
  cfg.algo = algo == "bfs" ? PlannerAlgo::kBfs : PlannerAlgo::kGreedy;
  out.result = cfg.restarts > 1 ? plan_with_restarts(g, cfg, threads).best : plan_toolpath(g, cfg);
  return out;
}

std::string gap(double dqn, double base) {
  if (!(base != 0.0)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * (base - dqn) / std::abs(base));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpath: DQN graph-coverage toolpath planner"};
  app.require_subcommand(1);

  Common plan_opts;
  std::string prior_file;
  auto* plan = app.add_subcommand("plan", "plan a toolpath with the DQN planner");
  add_common(plan, plan_opts);
  plan->add_option("--prior-file", prior_file, "prior store to load (if present) and save");

  Common base_opts;
  std::string algo = "greedy";
  long long budget = 2'000'000;
  auto* baseline = app.add_subcommand("baseline", "plan with a comparison planner");
  add_common(baseline, base_opts);
  baseline->add_option("--algo", algo, "bfs | greedy | dfs")
      ->check(CLI::IsMember({"bfs", "greedy", "dfs"}));
  baseline->add_option("--budget", budget, "dfs node-expansion budget");

  Common cmp_opts;
  std::string cmp_algo = "dfs";
  std::string table_path;
  auto* compare = app.add_subcommand("compare", "run the DQN planner and a baseline; print a gap table");
  add_common(compare, cmp_opts);
  compare->add_option("--algo", cmp_algo, "bfs | greedy | dfs")
      ->check(CLI::IsMember({"bfs", "greedy", "dfs"}));
  compare->add_option("--budget", budget, "dfs node-expansion budget");
  compare->add_option("--table", table_path, "write the gap table as CSV");

  std::string rep_toolpath, rep_graph, rep_format = "json", rep_out;
  double rep_pitch = 1.0;
  auto* report = app.add_subcommand("report", "re-measure a toolpath file and emit a report");
  report->add_option("toolpath", rep_toolpath, "toolpath file")->required();
  report->add_option("--graph", rep_graph, "graph the toolpath was planned on")->required();
  report->add_option("--pitch", rep_pitch, "PGM pixel pitch in mm");
  report->add_option("--format", rep_format, "json | csv | svg")
      ->check(CLI::IsMember({"json", "csv", "svg"}));
  report->add_option("--out", rep_out, "output file (default: stdout)");

  std::string gen_kind, gen_out;
  int gen_a = 0, gen_b = 0;
  double gen_pitch = 0.0;
  auto* generate = app.add_subcommand("generate", "write a bundled model");
  generate->add_option("kind", gen_kind, "dome | triangle | honeycomb | grid")
      ->required()
      ->check(CLI::IsMember({"dome", "triangle", "honeycomb", "grid"}));
  generate->add_option("--out", gen_out, "output file")->required();
  generate->add_option("-a", gen_a, "first size (rings, columns or width)");
  generate->add_option("-b", gen_b, "second size (segments, rows or height)");
  generate->add_option("--pitch", gen_pitch, "spacing in mm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*plan) {
      const Graph g = load_graph(plan_opts);
      const PlanConfig cfg = make_config(plan_opts);
      const int threads = plan_opts.threads > 0 ? plan_opts.threads : thread_count_from_env();
      print_config(cfg, g, threads);
      PlanResult r;
      if (!prior_file.empty()) {
        if (cfg.restarts > 1) throw ArgumentError("--prior-file needs --restarts 1");
        PriorStore store = std::filesystem::exists(prior_file) ? PriorStore::load(prior_file)
                                                                : PriorStore(cfg.priors);
        std::cout << "priors loaded: " << store.size() << "\n";
        r = plan_toolpath(g, cfg, std::nullopt, &store);
        store.save(prior_file);
        std::cout << "priors saved: " << store.size() << " -> " << prior_file << "\n";
      } else {
        r = run_dqn(plan_opts, g, cfg, threads);
      }
      print_summary(cfg, r, "dqn");
      write_outputs(plan_opts, g, cfg, r, "dqn");
    } else if (*baseline) {
      const Graph g = load_graph(base_opts);
      PlanConfig cfg = make_config(base_opts);
      if (algo != "dfs") cfg.algo = algo == "bfs" ? PlannerAlgo::kBfs : PlannerAlgo::kGreedy;
      const int threads = base_opts.threads > 0 ? base_opts.threads : thread_count_from_env();
      print_config(cfg, g, threads);
      std::cout << "algo: " << algo << (algo == "dfs" ? " (DFS with backtracking, in the spirit of the dual-graph DFS comparison method)" : "") << "\n";
      const BaselineOut b = run_baseline(algo, g, cfg, threads, budget);
      if (algo == "dfs") {
        std::cout << "dfs expansions: " << b.dfs_expansions
                  << (b.dfs_complete ? "" : " (budget exhausted, partial result)") << "\n";
      }
      print_summary(cfg, b.result, algo);
      write_outputs(base_opts, g, cfg, b.result, algo);
      if (!b.dfs_complete) return kExitInfeasible;
    } else if (*compare) {
      const Graph g = load_graph(cmp_opts);
      const PlanConfig cfg = make_config(cmp_opts);
      const int threads = cmp_opts.threads > 0 ? cmp_opts.threads : thread_count_from_env();
      print_config(cfg, g, threads);
      const PlanResult d = run_dqn(cmp_opts, g, cfg, threads);
      print_summary(cfg, d, "dqn");
      const BaselineOut b = run_baseline(cmp_algo, g, cfg, threads, budget);
      print_summary(cfg, b.result, cmp_algo);
      write_outputs(cmp_opts, g, cfg, d, "dqn");

      std::ostringstream t;
      t << "metric,dqn," << cmp_algo << ",reduction_pct\n";
      auto row = [&](const char* name, double x, double y) {
        t << name << ',' << x << ',' << y << ',' << gap(x, y) << '\n';
      };
      const PathMetrics &dm = d.metrics, &bm = b.result.metrics;
      row("moves", dm.steps, bm.steps);
      row("jumps", dm.jumps, bm.jumps);
      row("length_mm", dm.total_length, bm.total_length);
      row("jump_length_mm", dm.jump_length, bm.jump_length);
      if (cfg.mode == CoverageMode::kWireframe) {
        row("peak_u_max_mm", dm.peak_u_max, bm.peak_u_max);
        row("collisions", dm.collisions, bm.collisions);
      } else if (cfg.mode == CoverageMode::kCcf) {
        row("sharp_turns", dm.sharp_turns, bm.sharp_turns);
        row("double_traversals", dm.double_traversals, bm.double_traversals);
      } else {
        row("peak_hot_area", dm.peak_hot_area, bm.peak_hot_area);
        row("hot_area_integral", dm.hot_area_integral, bm.hot_area_integral);
      }
      row("wall_s", d.wall_ms / 1000.0, b.result.wall_ms / 1000.0);
      std::cout << t.str();
      if (!table_path.empty()) write_file(table_path, t.str());
    } else if (*report) {
      const Graph g = std::filesystem::path(rep_graph).extension() == ".pgm"
                          ? parse_pgm_grid(rep_graph, rep_pitch)
                          : parse_graph(rep_graph);
      std::istringstream in(read_file(rep_toolpath));
      const ToolpathFile f = read_toolpath(in, rep_toolpath);
      for (const auto& s : f.path.steps) {
        if (!g.valid_node(s.node)) throw ParseError("toolpath node outside the graph", rep_toolpath);
      }
      PlanConfig cfg;
      cfg.mode = f.header.mode;
      PlanResult r;
      r.path = f.path;
      r.start = f.header.start;
      r.seed = f.header.seed;
      r.run = f.header.run;
      r.metrics = measure_toolpath(g, r.path, cfg.reward_config());
      std::ostringstream s;
      if (rep_format == "json") {
        write_report_json(s, g, cfg, r, f.header.algo);
      } else if (rep_format == "csv") {
        write_report_csv(s, r, cfg.mode);
      } else {
        write_report_svg(s, g, r, cfg.mode);
      }
      if (rep_out.empty()) {
        std::cout << s.str();
      } else {
        write_file(rep_out, s.str());
      }
    } else if (*generate) {
      std::ostringstream s;
      if (gen_kind == "grid") {
        const int w = gen_a > 0 ? gen_a : 60, h = gen_b > 0 ? gen_b : 60;
        write_pgm(s, w, h, filled_mask(w, h));
      } else {
        Graph g;
        if (gen_kind == "dome") {
          g = dome_wireframe(gen_pitch > 0 ? gen_pitch : 30.0, 0.6 * (gen_pitch > 0 ? gen_pitch : 30.0),
                             gen_a > 0 ? gen_a : 4, gen_b > 0 ? gen_b : 16);
        } else if (gen_kind == "triangle") {
          g = triangle_grid(gen_a > 0 ? gen_a : 12, gen_b > 0 ? gen_b : 11, gen_pitch > 0 ? gen_pitch : 5.0);
        } else {
          g = honeycomb_grid(gen_a > 0 ? gen_a : 10, gen_b > 0 ? gen_b : 10, gen_pitch > 0 ? gen_pitch : 3.0);
        }
        write_graph_json(s, g);
        std::cout << gen_kind << ": " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
      }
      write_file(gen_out, s.str());
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PlanningFailure& e) {
    std::cerr << "infeasible: " << e.what() << " (" << e.uncovered_edges().size()
              << " edges and " << e.uncovered_nodes().size() << " nodes uncovered)\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
