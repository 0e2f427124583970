// Command-line driver: solve problem files, run the benchmark experiments,
// emit problem instances. Exit codes: 0 solved (Optimal/SuboptimalFeasible),
// 1 usage/file error, 2 Infeasible, 3 solver failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pvm/pvm.hpp"

namespace {

struct CommonOpts {
  pvm::SolverSettings st;
  double t0 = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 20240901;
  std::string trace_path;
  std::string csv_path;
  bool json_out = false;
};

void add_common(CLI::App* cmd, CommonOpts& opt) {
  cmd->add_option("--t0", opt.t0, "starting lower bound on the optimal cost");
  cmd->add_option("--eps-opt", opt.st.eps_opt, "stationarity tolerance");
  cmd->add_option("--eps-con", opt.st.eps_con, "feasibility tolerance");
  cmd->add_option("--sigma0", opt.st.sigma0, "initial proximal weight");
  cmd->add_option("--delta0", opt.st.delta0, "initial inner tolerance");
  cmd->add_option("--max-outer", opt.st.max_outer, "outer iteration cap");
  cmd->add_option("--seed", opt.seed, "RNG seed for benchmark perturbations");
  cmd->add_option("--trace", opt.trace_path, "write per-outer trace CSV");
  cmd->add_option("--csv", opt.csv_path, "write result CSV");
  cmd->add_flag("--json", opt.json_out, "machine-readable report on stdout");
}

void apply_t0(CommonOpts& opt) {
  if (!std::isnan(opt.t0)) opt.st.t0 = opt.t0;
}

bool write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open " << path << " for writing\n";
    return false;
  }
  out << body;
  return true;
}

std::string trace_csv(const pvm::SolveReport& rep) {
  std::ostringstream os;
  os << "k,t,r,sigma,delta_beta,newton_pa,newton_pb\n";
  for (const auto& rec : rep.trace)
    os << rec.k << ',' << pvm::fmt17(rec.t) << ',' << pvm::fmt17(rec.r) << ','
       << pvm::fmt17(rec.sigma) << ',' << pvm::fmt17(rec.delta_beta) << ','
       << rec.newton_pa << ',' << rec.newton_pb << "\n";
  return os.str();
}

int report_exit(const pvm::SolveReport& rep) {
  switch (rep.status) {
    case pvm::SolveStatus::Optimal:
    case pvm::SolveStatus::SuboptimalFeasible:
      return 0;
    case pvm::SolveStatus::Infeasible:
      return 2;
    default:
      return 3;
  }
}

int cmd_solve(const std::string& path, CommonOpts& opt) {
  pvm::ProblemData prob;
  try {
    prob = pvm::load_problem(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  apply_t0(opt);
  pvm::Solver solver(prob, opt.st);
  const pvm::SolveReport rep = solver.solve();
  if (opt.json_out) {
    std::cout << pvm::report_to_json(rep).dump(2) << "\n";
  } else if (rep.status == pvm::SolveStatus::Infeasible) {
    std::printf("Infeasible M=%.6g newton=%d\n", rep.M_estimate,
                rep.cumulative_newton);
  } else {
    std::printf("%s t=%.6g newton=%d\n", pvm::to_string(rep.status),
                rep.t_final, rep.cumulative_newton);
  }
  if (!opt.trace_path.empty() && !write_file(opt.trace_path, trace_csv(rep)))
    return 1;
  return report_exit(rep);
}

int cmd_bench_warmstart(CommonOpts& opt) {
  apply_t0(opt);
  pvm::ExperimentGrid grid;
  grid.rng_seed = opt.seed;
  const auto prob = pvm::build_mpc(pvm::MpcSpec{});
  const auto res = pvm::bench_warmstart(prob, grid, opt.st);
  const std::string csv = pvm::warmstart_csv(res, grid, opt.st);
  std::cout << csv;
  if (!opt.csv_path.empty() && !write_file(opt.csv_path, csv)) return 1;
  return 0;
}

int cmd_bench_recover(CommonOpts& opt) {
  apply_t0(opt);
  const auto prob = pvm::build_mpc(pvm::MpcSpec{});
  const auto baseline = pvm::solve_baseline(prob, opt.st);
  const auto levels = pvm::default_recover_levels(baseline.t_star);
  const std::vector<double> radii{0.1, 0.01, 0.001, -1.0};
  const auto res =
      pvm::bench_recover(prob, levels, radii, 11, opt.seed, opt.st);
  const std::string csv = pvm::recover_csv(res, opt.seed, opt.st);
  std::cout << csv;
  if (!opt.csv_path.empty() && !write_file(opt.csv_path, csv)) return 1;
  return 0;
}

int cmd_bench_infeasible(CommonOpts& opt) {
  apply_t0(opt);
  const auto res = pvm::bench_infeasible(opt.st);
  std::printf("instances=%d misclassified=%d\n", res.total, res.misclassified);
  std::printf("newton min=%d max=%d median=%d  (%.0f ms total)\n",
              res.min_newton, res.max_newton, res.median_newton, res.wall_ms);
  // paper-reported interior-point rows for context (not re-run):
  std::printf("context: ecos 4/6/5, hypatia 4/27/14, clarabel 5/7/6\n");
  if (!opt.csv_path.empty() &&
      !write_file(opt.csv_path, pvm::infeasible_csv(res, opt.st)))
    return 1;
  return res.misclassified == 0 ? 0 : 3;
}

int cmd_emit_mpc(const std::string& path) {
  const auto prob = pvm::build_mpc(pvm::MpcSpec{});
  try {
    pvm::save_problem(prob, path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::printf("wrote %s (n=%d m=%d)\n", path.c_str(), prob.n(), prob.m());
  return 0;
}

int cmd_emit_family(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "cannot create " << dir << ": " << ec.message() << "\n";
    return 1;
  }
  const auto family = pvm::build_infeasible_family();
  for (const auto& prob : family) {
    const std::string path = dir + "/" + prob.name + ".json";
    try {
      pvm::save_problem(prob, path);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
  }
  std::printf("wrote %zu instances to %s\n", family.size(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proximal value-function QP/LP solver"};
  app.require_subcommand(1);
  CommonOpts opt;

  std::string solve_path;
  auto* solve = app.add_subcommand("solve", "solve a problem file");
  solve->add_option("file", solve_path, "problem JSON file")->required();
  add_common(solve, opt);

  auto* bench = app.add_subcommand("bench", "run a benchmark experiment");
  bench->require_subcommand(1);
  auto* warm = bench->add_subcommand("warmstart", "warm-start grid");
  add_common(warm, opt);
  auto* recover = bench->add_subcommand("recover", "feasibility recovery");
  add_common(recover, opt);
  auto* infeas = bench->add_subcommand("infeasible", "infeasible family");
  add_common(infeas, opt);

  auto* emit = app.add_subcommand("emit", "write problem instances");
  emit->require_subcommand(1);
  std::string emit_path = "mpc.json";
  std::string emit_dir = "infeasible_family";
  auto* emit_mpc = emit->add_subcommand("mpc", "baseline MPC instance");
  emit_mpc->add_option("--out", emit_path, "output file");
  auto* emit_family =
      emit->add_subcommand("infeasible-family", "all 72 infeasible instances");
  emit_family->add_option("--emit-dir", emit_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(solve_path, opt);
    if (*warm) return cmd_bench_warmstart(opt);
    if (*recover) return cmd_bench_recover(opt);
    if (*infeas) return cmd_bench_infeasible(opt);
    if (*emit_mpc) return cmd_emit_mpc(emit_path);
    if (*emit_family) return cmd_emit_family(emit_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
