#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sldp/bench.hpp"
#include "sldp/cli.hpp"
#include "sldp/problem_io.hpp"

namespace sldp::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("SLDP_LOG");
    if (env == nullptr) return 0;
    const std::string s(env);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

std::string format_double(double v, const char* fmt = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void write_iterations_csv(const RunResult& result, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "iter,lb,cuts_total,stage_solves,wall_ms\n";
  long cuts_total = 0, solves_total = 0;
  for (const IterationRecord& rec : result.iterations) {
    cuts_total += rec.cuts_added;
    solves_total += rec.stage_solves;
    out << rec.iteration << ',' << format_double(rec.lower_bound) << ',' << cuts_total
        << ',' << solves_total << ',' << format_double(rec.wall_ms, "%.3f") << '\n';
  }
}

json pool_to_json(const CutPool& pool) {
  json j;
  j["stage"] = pool.stage;
  j["node"] = pool.node;
  j["floor"] = pool.floor;
  j["cuts"] = json::array();
  for (const Cut& c : pool.cuts) {
    json cj;
    cj["center"] = std::vector<double>(c.center.data(), c.center.data() + c.center.size());
    cj["value"] = c.value;
    cj["slope"] = std::vector<double>(c.slope.data(), c.slope.data() + c.slope.size());
    cj["opening"] = c.opening;
    cj["family"] = to_string(c.family);
    cj["stage"] = c.stage;
    cj["node"] = c.node;
    cj["iteration"] = c.iteration;
    j["cuts"].push_back(std::move(cj));
  }
  return j;
}

void write_result_json(const RunResult& result, const ProblemFile& pf,
                       const fs::path& path) {
  json j;
  {
    // echo the effective configuration by round-tripping the file section
    ProblemFile echo = pf;
    const json full = json::parse(serialize_problem_file(echo));
    j["config"] = full["config"];
  }
  j["problem"] = pf.data.name;
  j["final_lb"] = result.final_lower_bound();
  j["iterations"] = result.iterations.size();
  j["termination"] = result.termination;
  j["warnings"] = result.warnings;
  j["total_stage_solves"] = result.total_stage_solves;
  j["total_wall_ms"] = result.total_wall_ms;
  if (result.policy.samples > 0) {
    j["policy"] = {{"mean", result.policy.mean},
                   {"std_error", result.policy.std_error},
                   {"samples", result.policy.samples}};
  } else {
    j["policy"] = nullptr;
  }
  j["pools"] = json::array();
  for (const CutPool& pool : result.pools) j["pools"].push_back(pool_to_json(pool));
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

struct SolveFlags {
  std::string problem;
  std::string out_dir = ".";
  std::string mode, cuts;
  int iters = -1;
  std::vector<double> rho;
  double rho0 = -1, gamma = -1, rho_max = -1;
  int rho_period = -1;
  double delta = -1;
  long seed = -1;
  int sim_samples = -1;
  double stop_tol = -1;
  int stop_window = -1;
};

void apply_overrides(const SolveFlags& f, SldpConfig& c) {
  if (f.mode == "full") c.mode = Mode::FullTree;
  if (f.mode == "sampled") c.mode = Mode::Sampled;
  if (f.cuts == "rn") c.family = CutFamily::ReverseNorm;
  if (f.cuts == "sb") c.family = CutFamily::StrengthenedBenders;
  if (f.cuts == "sab") c.family = CutFamily::StrengthenedAugBenders;
  if (f.iters >= 0) c.max_iterations = f.iters;
  if (!f.rho.empty()) c.rho = f.rho;
  if (f.rho0 >= 0) c.schedule.rho0 = f.rho0;
  if (f.gamma >= 0) c.schedule.gamma = f.gamma;
  if (f.rho_period >= 0) c.schedule.period = f.rho_period;
  if (f.rho_max >= 0) c.schedule.rho_max = f.rho_max;
  if (f.delta >= 0) c.delta = f.delta;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.sim_samples >= 0) c.sim_samples = f.sim_samples;
  if (f.stop_tol >= 0) c.stop_tol = f.stop_tol;
  if (f.stop_window >= 0) c.stop_window = f.stop_window;
}

RunResult execute(const ProblemFile& pf) {
  const SldpConfig& cfg = pf.config;
  RunResult result;
  if (cfg.mode == Mode::FullTree) {
    const ScenarioTree tree = build_stagewise_tree(pf.data.scenarios, cfg.tree_node_cap);
    result = run_full(tree, pf.data, cfg);
    if (cfg.sim_samples > 0)
      result.policy = simulate_policy(pf.data, result.pools, result.scope, &tree,
                                      cfg.sim_samples, cfg.seed + 1, cfg.solver);
  } else {
    const double nodes = stagewise_node_count(pf.data.scenarios);
    if (nodes <= static_cast<double>(cfg.tree_node_cap) &&
        pf.config.pool_scope == PoolScope::PerNode) {
      const ScenarioTree tree = build_stagewise_tree(pf.data.scenarios, cfg.tree_node_cap);
      result = run_sampled(tree, pf.data, cfg);
      if (cfg.sim_samples > 0)
        result.policy = simulate_policy(pf.data, result.pools, result.scope, &tree,
                                        cfg.sim_samples, cfg.seed + 1, cfg.solver);
    } else {
      SldpConfig lazy_cfg = cfg;
      lazy_cfg.pool_scope = PoolScope::PerStage;
      result = run_sampled_lazy(pf.data, lazy_cfg);
      if (cfg.sim_samples > 0)
        result.policy = simulate_policy(pf.data, result.pools, result.scope, nullptr,
                                        cfg.sim_samples, cfg.seed + 1, cfg.solver);
    }
  }
  return result;
}

int cmd_solve(const SolveFlags& flags) {
  ProblemFile pf;
  try {
    pf = load_problem_file(flags.problem);
    apply_overrides(flags, pf.config);
    validate_problem_data(pf.data);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const fs::path out_dir(flags.out_dir);
  fs::create_directories(out_dir);
  const RunResult result = execute(pf);
  write_iterations_csv(result, out_dir / "iterations.csv");
  write_result_json(result, pf, out_dir / "result.json");
  std::cout << "problem " << pf.data.name << ": lb = "
            << format_double(result.final_lower_bound()) << " after "
            << result.iterations.size() << " iterations (" << result.termination
            << ")\n";
  if (result.policy.samples > 0)
    std::cout << "policy mean = " << format_double(result.policy.mean)
              << " +/- " << format_double(result.policy.std_error) << " ("
              << result.policy.samples << " samples)\n";
  return 0;
}

int cmd_validate(const std::string& problem) {
  try {
    const ProblemFile pf = load_problem_file(problem);
    validate_problem_data(pf.data);
    std::cout << "ok: " << problem << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

void write_oracle_table(const OracleTable& table, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# stage " << table.stage << (table.exact ? " (exact)" : " (grid approximation)")
      << "\n";
  const Eigen::Index d = table.values.empty() ? 0 : table.values.front().first.size();
  for (Eigen::Index j = 0; j < d; ++j) out << "x" << j + 1 << ",";
  out << "value\n";
  for (const auto& [x, v] : table.values) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_double(x[j]) << ",";
    out << format_double(v) << "\n";
  }
}

int cmd_oracle(const std::string& problem, const std::string& suite,
               const std::string& out_dir, double grid) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  if (suite == "caroe") {
    for (int n : {2, 3, 6}) {
      const ProblemData data = gen_caroe_schultz({n, true});
      const double objective = oracle_root_objective(data);
      std::cout << "caroe N=" << n << " discrete objective = "
                << format_double(objective, "%.6f") << "\n";
      std::vector<Eigen::VectorXd> first_stage;
      for (int x1 = 0; x1 <= 5; ++x1)
        for (int x2 = 0; x2 <= 5; ++x2) {
          Eigen::VectorXd x(2);
          x << x1, x2;
          first_stage.push_back(x);
        }
      const auto tables = exact_expected_ctg(data, {first_stage});
      write_oracle_table(tables[0],
                         dir / ("oracle_caroe_n" + std::to_string(n) + "_stage1.csv"));
    }
    return 0;
  }
  ProblemFile pf;
  try {
    pf = load_problem_file(problem);
    validate_problem_data(pf.data);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<OracleTable> tables;
  bool exact = true;
  try {
    std::vector<std::vector<Eigen::VectorXd>> samples;
    for (int t = 1; t <= pf.data.horizon() - 1; ++t) {
      const StageTemplate& templ = pf.data.templates[t - 1];
      std::vector<Eigen::VectorXd> grid_points;
      if (templ.state_vars.size() == 1) {
        for (double x = templ.state_lo[0]; x <= templ.state_hi[0] + 1e-9; x += grid) {
          Eigen::VectorXd v(1);
          v[0] = x;
          grid_points.push_back(v);
        }
      } else if (templ.state_vars.size() == 2) {
        for (double a = templ.state_lo[0]; a <= templ.state_hi[0] + 1e-9; a += grid)
          for (double b = templ.state_lo[1]; b <= templ.state_hi[1] + 1e-9; b += grid) {
            Eigen::VectorXd v(2);
            v << a, b;
            grid_points.push_back(v);
          }
      } else {
        throw Error("oracle grids support 1-D and 2-D states only");
      }
      samples.push_back(std::move(grid_points));
    }
    tables = exact_expected_ctg(pf.data, samples);
  } catch (const Error&) {
    exact = false;
    tables = grid_expected_ctg(pf.data, grid);
  }
  for (const OracleTable& table : tables)
    write_oracle_table(table,
                       dir / ("oracle_stage" + std::to_string(table.stage) + ".csv"));
  std::cout << "wrote " << tables.size() << (exact ? " exact" : " approximate")
            << " oracle tables to " << dir.string() << "\n";
  return 0;
}

double run_lb(const BenchRun& run) {
  RunResult result = execute(ProblemFile{1, run.data, run.config});
  return result.final_lower_bound();
}

int cmd_bench(const std::string& suite, const std::string& out_dir, int iters,
              int sim_samples, const std::string& emit_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  if (!emit_dir.empty()) {
    fs::create_directories(emit_dir);
    for (int n : {2, 3, 6})
      for (bool discrete : {true, false}) {
        BenchRun run = caroe_run(n, discrete, CutFamily::StrengthenedAugBenders);
        save_problem_file(ProblemFile{1, run.data, run.config},
                          (fs::path(emit_dir) / (run.data.name + ".json")).string());
      }
    BenchRun control = control_run(CutFamily::StrengthenedAugBenders);
    save_problem_file(ProblemFile{1, control.data, control.config},
                      (fs::path(emit_dir) / "control1d.json").string());
    std::cout << "wrote problem files to " << emit_dir << "\n";
  }
  if (suite == "caroe") {
    std::ofstream csv(dir / "bench_caroe.csv");
    csv << "variant,n,objective,sb_lb,sab_lb,remaining_pct\n";
    std::printf("%-10s %-3s %12s %12s %12s %10s\n", "variant", "N", "objective", "SB lb",
                "SAB lb", "remain %");
    for (bool discrete : {true, false}) {
      for (int n : {2, 3, 6}) {
        const double objective =
            oracle_root_objective(gen_caroe_schultz({n, true}));
        BenchRun sb = caroe_run(n, discrete, CutFamily::StrengthenedBenders);
        BenchRun sab = caroe_run(n, discrete, CutFamily::StrengthenedAugBenders);
        if (iters > 0) sab.config.max_iterations = iters;
        const double sb_lb = run_lb(sb);
        const double sab_lb = run_lb(sab);
        const double remaining =
            100.0 * (objective - sab_lb) / std::min(-1e-12, objective - sb_lb);
        const char* variant = discrete ? "discrete" : "continuous";
        csv << variant << ',' << n << ',' << format_double(objective) << ','
            << format_double(sb_lb) << ',' << format_double(sab_lb) << ','
            << format_double(remaining, "%.2f") << '\n';
        std::printf("%-10s %-3d %12.3f %12.3f %12.3f %10.2f\n", variant, n, objective,
                    sb_lb, sab_lb, remaining);
      }
    }
    std::cout << "wrote " << (dir / "bench_caroe.csv").string() << "\n";
    return 0;
  }
  if (suite == "control") {
    std::ofstream csv(dir / "bench_control.csv");
    csv << "method,lb,ub_mean,ub_std_error,iterations\n";
    std::printf("%-6s %10s %10s %12s\n", "method", "LB", "UB mean", "UB stderr");
    for (CutFamily family : {CutFamily::StrengthenedBenders, CutFamily::ReverseNorm,
                             CutFamily::StrengthenedAugBenders}) {
      BenchRun run = control_run(family);
      if (iters > 0) run.config.max_iterations = iters;
      run.config.sim_samples = sim_samples > 0 ? sim_samples : 400;
      RunResult result = execute(ProblemFile{1, run.data, run.config});
      const char* name = family == CutFamily::StrengthenedBenders
                             ? "sb"
                             : (family == CutFamily::ReverseNorm ? "rn" : "sab");
      csv << name << ',' << format_double(result.final_lower_bound()) << ','
          << format_double(result.policy.mean) << ','
          << format_double(result.policy.std_error) << ',' << result.iterations.size()
          << '\n';
      std::printf("%-6s %10.3f %10.3f %12.4f\n", name, result.final_lower_bound(),
                  result.policy.mean, result.policy.std_error);
    }
    std::cout << "wrote " << (dir / "bench_control.csv").string() << "\n";
    return 0;
  }
  std::cerr << "error: unknown suite " << suite << " (expected caroe or control)\n";
  return 2;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Stochastic Lipschitz dynamic programming solver"};
  app.require_subcommand(1);

  SolveFlags flags;
  CLI::App* solve = app.add_subcommand("solve", "run the engine on a problem file");
  solve->add_option("--problem", flags.problem, "problem file (JSON)")->required();
  solve->add_option("--out", flags.out_dir, "output directory");
  solve->add_option("--mode", flags.mode, "full|sampled")
      ->check(CLI::IsMember({"full", "sampled"}));
  solve->add_option("--cuts", flags.cuts, "rn|sb|sab")
      ->check(CLI::IsMember({"rn", "sb", "sab"}));
  solve->add_option("--iters", flags.iters, "iteration cap");
  solve->add_option("--rho", flags.rho, "reverse-norm opening per stage");
  solve->add_option("--rho0", flags.rho0, "schedule base opening");
  solve->add_option("--gamma", flags.gamma, "schedule growth factor");
  solve->add_option("--rho-period", flags.rho_period, "schedule period");
  solve->add_option("--rho-max", flags.rho_max, "schedule cap");
  solve->add_option("--delta", flags.delta, "sampled-mode stabilization radius");
  solve->add_option("--seed", flags.seed, "rng seed");
  solve->add_option("--sim-samples", flags.sim_samples, "policy simulation samples");
  solve->add_option("--stop-tol", flags.stop_tol, "stall tolerance (0 disables)");
  solve->add_option("--stop-window", flags.stop_window, "stall window");

  std::string validate_problem_path;
  CLI::App* validate = app.add_subcommand("validate", "check a problem file");
  validate->add_option("--problem", validate_problem_path, "problem file (JSON)")
      ->required();

  std::string oracle_problem, oracle_suite, oracle_out = ".";
  double oracle_grid = 0.1;
  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive-enumeration value tables");
  oracle->add_option("--problem", oracle_problem, "problem file (JSON)");
  oracle->add_option("--suite", oracle_suite, "caroe");
  oracle->add_option("--out", oracle_out, "output directory");
  oracle->add_option("--grid", oracle_grid, "grid spacing for oracle sweeps");

  std::string bench_suite, bench_out = ".", emit_dir;
  int bench_iters = -1, bench_sim = -1;
  CLI::App* bench = app.add_subcommand("bench", "paper case-study tables");
  bench->add_option("--suite", bench_suite, "caroe|control")->required();
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--iters", bench_iters, "override iteration cap");
  bench->add_option("--sim-samples", bench_sim, "policy simulation samples");
  bench->add_option("--emit-problems", emit_dir, "write the instances as problem files");

  std::vector<std::string> argv(args.rbegin(), args.rend());  // CLI11 wants reversed args
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(flags);
    if (validate->parsed()) return cmd_validate(validate_problem_path);
    if (oracle->parsed()) {
      if (oracle_suite.empty() && oracle_problem.empty()) {
        std::cerr << "error: oracle needs --problem or --suite\n";
        return 2;
      }
      return cmd_oracle(oracle_problem, oracle_suite, oracle_out, oracle_grid);
    }
    if (bench->parsed())
      return cmd_bench(bench_suite, bench_out, bench_iters, bench_sim, emit_dir);
  } catch (const MalformedProblemFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace sldp::cli
