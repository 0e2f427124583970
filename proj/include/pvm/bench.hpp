#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pvm/mpc.hpp"
#include "pvm/solver.hpp"

namespace pvm {

inline constexpr const char* kSolverVersion = "0.1.0";

// Warm-start experiment grid: starting levels on one axis, perturbation radii
// on the other. A negative epsilon entry encodes a cold start (x0 = 0); the
// median over trials_per_cell runs is reported per cell.
struct ExperimentGrid {
  std::vector<double> t0_values{0.18, 0.13, 0.09, 0.06, 0.0};
  std::vector<double> epsilon_values{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, -1.0};
  int trials_per_cell = 11;
  std::uint64_t rng_seed = 20240901;

  bool valid() const {
    return trials_per_cell > 0 && trials_per_cell % 2 == 1 &&
           !t0_values.empty() && !epsilon_values.empty();
  }
};

struct BenchCell {
  double t0 = 0.0;
  double epsilon = 0.0;  // negative: cold start
  int median_newton = 0;
  int min_newton = 0;
  int max_newton = 0;
  int failures = 0;  // non-Optimal/SuboptimalFeasible outcomes
  double wall_ms = 0.0;
};

inline int median_of(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Deterministic per-cell stream: trials are reproducible regardless of the
// order cells run in.
inline std::mt19937_64 cell_rng(std::uint64_t seed, std::uint64_t cell_index) {
  std::seed_seq seq{static_cast<unsigned>(seed), static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(cell_index),
                    static_cast<unsigned>(cell_index >> 32)};
  return std::mt19937_64(seq);
}

inline Vec perturb_uniform(const Vec& x_star, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-eps, eps);
  Vec x = x_star;
  for (int i = 0; i < x.size(); ++i) x[i] += dist(rng);
  return x;
}

// Reference solution for warm starting: one accurate cold solve.
struct Baseline {
  double t_star = 0.0;
  Vec x_star;
  int cold_newton = 0;
};

inline Baseline solve_baseline(const ProblemData& prob,
                               const SolverSettings& base = {}) {
  SolverSettings st = base;
  st.eps_opt = 1e-9;
  Solver solver(prob, st);
  const SolveReport rep = solver.solve();
  if (rep.status != SolveStatus::Optimal)
    throw std::runtime_error("baseline solve failed: " +
                             std::string(to_string(rep.status)));
  Baseline bl;
  bl.t_star = rep.t_final;
  bl.x_star = rep.x_final;
  {
    Solver cold(prob, base);
    bl.cold_newton = cold.solve().cumulative_newton;
  }
  return bl;
}

struct WarmstartResult {
  Baseline baseline;
  std::vector<BenchCell> cells;  // row-major: for each epsilon, each t0
};

inline WarmstartResult bench_warmstart(const ProblemData& prob,
                                       const ExperimentGrid& grid,
                                       const SolverSettings& base = {}) {
  if (!grid.valid()) throw std::invalid_argument("invalid ExperimentGrid");
  WarmstartResult out;
  out.baseline = solve_baseline(prob, base);

  std::uint64_t cell_index = 0;
  for (double eps : grid.epsilon_values) {
    for (double t0 : grid.t0_values) {
      BenchCell cell;
      cell.t0 = t0;
      cell.epsilon = eps;
      auto rng = cell_rng(grid.rng_seed, cell_index++);
      std::vector<int> counts;
      counts.reserve(grid.trials_per_cell);
      const auto t_begin = std::chrono::steady_clock::now();
      // cold cells are deterministic; a single trial gives the exact median
      const int trials = eps < 0.0 ? 1 : grid.trials_per_cell;
      for (int trial = 0; trial < trials; ++trial) {
        SolverSettings st = base;
        st.t0 = t0;
        Solver solver(prob, st);
        SolveReport rep;
        if (eps < 0.0) {
          rep = solver.solve();
        } else {
          WarmStart warm;
          warm.x = perturb_uniform(out.baseline.x_star, eps, rng);
          warm.s = prob.b - prob.A * warm.x;
          rep = solver.solve(warm);
        }
        counts.push_back(rep.cumulative_newton);
        if (rep.status != SolveStatus::Optimal &&
            rep.status != SolveStatus::SuboptimalFeasible)
          ++cell.failures;
      }
      cell.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_begin)
                         .count();
      cell.median_newton = median_of(counts);
      cell.min_newton = counts.front();
      cell.max_newton = counts.back();
      out.cells.push_back(cell);
    }
  }
  return out;
}

// Feasibility-recovery experiment: fixed levels above the optimum, Pa-only
// solves from perturbed warm starts.
struct RecoverResult {
  Baseline baseline;
  std::vector<BenchCell> cells;  // (t, epsilon) pairs, epsilon<0 = cold
};

inline std::vector<double> default_recover_levels(double t_star, int count = 20) {
  // geometric spread from just above t* to 10x
  std::vector<double> out;
  const double lo = t_star * 1.05;
  const double hi = t_star * 10.0;
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return out;
}

inline RecoverResult bench_recover(const ProblemData& prob,
                                   const std::vector<double>& t_values,
                                   const std::vector<double>& epsilon_values,
                                   int trials_per_cell = 11,
                                   std::uint64_t seed = 20240901,
                                   const SolverSettings& base = {}) {
  RecoverResult out;
  out.baseline = solve_baseline(prob, base);
  std::uint64_t cell_index = 1000000;  // disjoint from the warm-start streams
  for (double eps : epsilon_values) {
    for (double t : t_values) {
      BenchCell cell;
      cell.t0 = t;
      cell.epsilon = eps;
      auto rng = cell_rng(seed, cell_index++);
      std::vector<int> counts;
      const int trials = eps < 0.0 ? 1 : trials_per_cell;
      const auto t_begin = std::chrono::steady_clock::now();
      for (int trial = 0; trial < trials; ++trial) {
        Solver solver(prob, base);
        SolveReport rep;
        if (eps < 0.0) {
          rep = solver.recover_feasible(t);
        } else {
          WarmStart warm;
          warm.x = perturb_uniform(out.baseline.x_star, eps, rng);
          warm.s = prob.b - prob.A * warm.x;
          rep = solver.recover_feasible(t, warm);
        }
        counts.push_back(rep.cumulative_newton);
        if (rep.status != SolveStatus::SuboptimalFeasible) ++cell.failures;
      }
      cell.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_begin)
                         .count();
      cell.median_newton = median_of(counts);
      cell.min_newton = counts.front();
      cell.max_newton = counts.back();
      out.cells.push_back(cell);
    }
  }
  return out;
}

struct InfeasibleResult {
  int total = 0;
  int misclassified = 0;  // anything other than Infeasible
  int min_newton = 0;
  int max_newton = 0;
  int median_newton = 0;
  double wall_ms = 0.0;
  std::vector<std::pair<std::string, int>> per_instance;
};

inline InfeasibleResult bench_infeasible(const SolverSettings& base = {}) {
  InfeasibleResult out;
  const auto family = build_infeasible_family();
  out.total = static_cast<int>(family.size());
  std::vector<int> counts;
  const auto t_begin = std::chrono::steady_clock::now();
  for (const auto& prob : family) {
    Solver solver(prob, base);
    const SolveReport rep = solver.solve();
    if (rep.status != SolveStatus::Infeasible) ++out.misclassified;
    counts.push_back(rep.cumulative_newton);
    out.per_instance.emplace_back(prob.name, rep.cumulative_newton);
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_begin)
                    .count();
  std::vector<int> sorted = counts;
  out.median_newton = median_of(sorted);
  out.min_newton = sorted.front();
  out.max_newton = sorted.back();
  return out;
}

// --- CSV emission -----------------------------------------------------------
// Comma separated, LF endings, 17 significant digits. Header comment lines
// carry version/settings/seed; the body is byte-reproducible at a fixed seed.

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_preamble(const SolverSettings& st, std::uint64_t seed) {
  std::ostringstream os;
  os << "# solver_version=" << kSolverVersion << "\n";
  os << "# eps_opt=" << fmt17(st.eps_opt) << " eps_con=" << fmt17(st.eps_con)
     << " sigma0=" << fmt17(st.sigma0) << " delta0=" << fmt17(st.delta0)
     << " max_outer=" << st.max_outer << "\n";
  os << "# seed=" << seed << "\n";
  return os.str();
}

inline std::string warmstart_csv(const WarmstartResult& res,
                                 const ExperimentGrid& grid,
                                 const SolverSettings& st) {
  std::ostringstream os;
  os << csv_preamble(st, grid.rng_seed);
  // paper-reported cold-start iteration counts of interior-point solvers on
  // the same instance, for context (not re-run here)
  os << "# context_cold_iters: clarabel=9 ecos=14 hypatia=16\n";
  os << "# baseline t_star=" << fmt17(res.baseline.t_star)
     << " cold_newton=" << res.baseline.cold_newton << "\n";
  os << "t0,epsilon,median_newton,min_newton,max_newton,failures,wall_ms,seed\n";
  for (const auto& c : res.cells)
    os << fmt17(c.t0) << ',' << (c.epsilon < 0 ? "cold" : fmt17(c.epsilon))
       << ',' << c.median_newton << ',' << c.min_newton << ',' << c.max_newton
       << ',' << c.failures << ',' << fmt17(c.wall_ms) << ',' << grid.rng_seed
       << "\n";
  return os.str();
}

inline std::string recover_csv(const RecoverResult& res, std::uint64_t seed,
                               const SolverSettings& st) {
  std::ostringstream os;
  os << csv_preamble(st, seed);
  os << "t,epsilon,median_newton,min_newton,max_newton,failures,wall_ms,seed\n";
  for (const auto& c : res.cells)
    os << fmt17(c.t0) << ',' << (c.epsilon < 0 ? "cold" : fmt17(c.epsilon))
       << ',' << c.median_newton << ',' << c.min_newton << ',' << c.max_newton
       << ',' << c.failures << ',' << fmt17(c.wall_ms) << ',' << seed << "\n";
  return os.str();
}

inline std::string infeasible_csv(const InfeasibleResult& res,
                                  const SolverSettings& st) {
  std::ostringstream os;
  os << csv_preamble(st, 0);
  // paper-reported min/max/median contexts: ecos 4/6/5, hypatia 4/27/14,
  // clarabel 5/7/6
  os << "# summary min=" << res.min_newton << " max=" << res.max_newton
     << " median=" << res.median_newton << " misclassified="
     << res.misclassified << "\n";
  os << "instance,newton\n";
  for (const auto& [name, count] : res.per_instance)
    os << name << ',' << count << "\n";
  return os.str();
}

}  // namespace pvm
