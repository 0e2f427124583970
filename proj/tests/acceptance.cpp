// Acceptance gate: one pass/fail line per criterion. Exit code equals the
// number of failed criteria.
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <new>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "pvm/pvm.hpp"

namespace {
std::atomic<long> g_allocs{0};
std::atomic<bool> g_counting{false};
}  // namespace

void* operator new(std::size_t sz) {
  if (g_counting.load(std::memory_order_relaxed))
    g_allocs.fetch_add(1, std::memory_order_relaxed);
  if (void* p = std::malloc(sz ? sz : 1)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t sz) { return ::operator new(sz); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

using namespace pvm;
using oracle::Vec;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void verdict(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", idx,
              name, detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. derivative correctness on random instances
void criterion_gradients() {
  const auto t_begin = Clock::now();
  std::mt19937_64 rng(9001);
  std::normal_distribution<double> gauss;
  int grad_bad = 0, hess_bad = 0, grad_checked = 0, hess_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> nd(1, 10), md(1, 15);
    const int n = nd(rng), m = md(rng);
    std::uniform_int_distribution<int> zd(0, m);
    const ProblemData prob = oracle::random_instance(rng, n, m, zd(rng));
    Vec z(n + m);
    for (int i = 0; i < n + m; ++i) z[i] = gauss(rng);
    const double t = gauss(rng);
    MeritEval me(n, m);
    eval_merit(prob, z.head(n), z.tail(m), t, me);

    bool smooth = std::abs(me.q_minus_t) > 1e-3;
    for (int i = prob.cone.zero_dim; i < m && smooth; ++i)
      if (std::abs(z[n + i]) < 1e-3) smooth = false;
    if (!smooth) continue;

    auto f = [&](const Vec& zz) {
      return oracle::merit_reference(prob, zz.head(n), zz.tail(m), t);
    };
    const Vec fd = oracle::fd_gradient(f, z);
    Vec g(n + m);
    g.head(n) = me.grad_x;
    g.tail(m) = me.grad_s;
    ++grad_checked;
    if ((g - fd).norm() > 1e-5 * (1.0 + fd.norm())) ++grad_bad;

    if (n + m <= 12) {
      HessianElement he(n, m);
      select_hessian(prob, me, z.tail(m), t, StageMode::PA, 0.0, he);
      const oracle::Mat Ad(prob.A);
      const oracle::Mat Qd = oracle::dense_symmetric(prob.Q);
      oracle::Mat H = oracle::Mat::Zero(n + m, n + m);
      H.topLeftCorner(n, n) = Ad.transpose() * Ad + he.rq_scale * Qd;
      H.topRightCorner(n, m) = Ad.transpose();
      H.bottomLeftCorner(m, n) = Ad;
      for (int i = 0; i < m; ++i) H(n + i, n + i) = he.H_diag_s[i];
      if (he.rank1_active) {
        Vec u = Vec::Zero(n + m);
        u.head(n) = he.rank1_vector;
        H += u * u.transpose();
      }
      const oracle::Mat fdh = oracle::fd_hessian(f, z);
      ++hess_checked;
      if ((H - fdh).norm() > 1e-4 * (1.0 + fdh.norm())) ++hess_bad;
    }
  }
  const double secs = seconds_since(t_begin);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "grad %d/%d ok, hess %d/%d ok, %.2f s", grad_checked - grad_bad,
                grad_checked, hess_checked - hess_bad, hess_checked, secs);
  verdict(1, "gradient/Hessian correctness",
          grad_bad == 0 && hess_bad == 0 && grad_checked >= 40 &&
              hess_checked >= 10 && secs < 10.0,
          buf);
}

// 2. oracle equivalence on random feasible QPs
void criterion_oracle_equivalence() {
  const auto t_begin = Clock::now();
  std::mt19937_64 rng(4242);
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> nd(2, 6);
    const int n = nd(rng);
    std::uniform_int_distribution<int> md(1, 12 - n);
    const int m = md(rng);
    std::uniform_int_distribution<int> zd(0, std::min(m, n - 1));
    const ProblemData prob = oracle::random_feasible_qp(rng, n, m, zd(rng));
    const auto sol = oracle::active_set_solve(prob);
    if (!sol.found) {
      ++bad;
      continue;
    }
    Solver solver(prob);
    const SolveReport rep = solver.solve();
    const double err = std::abs(rep.t_final - sol.value);
    worst = std::max(worst, err);
    if (rep.status != SolveStatus::Optimal || err > 1e-6 ||
        rep.r_final > 1e-8)
      ++bad;
  }
  const double secs = seconds_since(t_begin);
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d/50 ok, worst |t - t*| = %.2e, %.2f s",
                50 - bad, worst, secs);
  verdict(2, "active-set oracle equivalence", bad == 0 && secs < 30.0, buf);
}

// 3. toy reproduction and value-function shape
void criterion_toys() {
  const ProblemData feas = oracle::toy_problem(2.0);
  const ProblemData infeas = oracle::toy_problem(0.0);
  SolverSettings st;
  st.t0 = -1.0;

  const SolveReport rf = Solver(feas, st).solve();
  const bool feas_ok = rf.status == SolveStatus::Optimal &&
                       std::abs(rf.t_final - 0.5) <= 1e-4;

  const SolveReport ri = Solver(infeas, st).solve();
  const double M_oracle = oracle::grid_refine_min(
      [&](const Vec& z) {
        return oracle::merit_reference(infeas, z.head(1), z.tail(2), 1e9);
      },
      Vec::Constant(3, -2.0), Vec::Constant(3, 2.0));
  const bool infeas_ok = ri.status == SolveStatus::Infeasible &&
                         std::abs(ri.M_estimate - M_oracle) <= 1e-6;

  // r*(t) samples on [t0, just below t*]
  std::vector<double> ts, rs;
  for (int i = 0; i < 50; ++i) {
    ts.push_back(-2.0 + 2.4 * i / 49.0);
    rs.push_back(oracle::value_function_sample(feas, ts.back()));
  }
  bool monotone = true, convex = true;
  for (size_t i = 1; i < ts.size(); ++i)
    if (rs[i] > rs[i - 1] + 1e-10) monotone = false;
  for (size_t i = 1; i + 1 < ts.size(); ++i)
    if (rs[i] > 0.5 * (rs[i - 1] + rs[i + 1]) + 1e-10) convex = false;
  double a = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ts.size(); ++i)
    a = std::min(a, rs[i] / ((ts[i] - 0.5) * (ts[i] - 0.5)));
  const bool parabola = a > 0.0;

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "t=%.5f, M=%.6f vs %.6f, monotone=%d convex=%d a=%.3f",
                rf.t_final, ri.M_estimate, M_oracle, int(monotone),
                int(convex), a);
  verdict(3, "toy reproduction + r* shape",
          feas_ok && infeas_ok && monotone && convex && parabola, buf);
}

// 4. Lemma 2 monotone level climb on oracle instances
void criterion_monotone() {
  std::mt19937_64 rng(515);
  int bad = 0;
  int count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ProblemData prob = oracle::random_feasible_qp(rng, 3, 5, 1);
    const auto sol = oracle::active_set_solve(prob);
    if (!sol.found) continue;
    ++count;
    SolverSettings st;
    st.t0 = sol.value - 1.0;
    const SolveReport rep = Solver(prob, st).solve();
    double prev = -1e300;
    bool ok = rep.status == SolveStatus::Optimal;
    for (const auto& rec : rep.trace) {
      if (rec.t < prev - 1e-12 || rec.t > sol.value + 1e-4) ok = false;
      prev = rec.t;
    }
    if (rep.t_final > sol.value + 1e-4) ok = false;
    if (!ok) ++bad;
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "%d/%d instances monotone within bound",
                count - bad, count);
  verdict(4, "monotone non-overshooting level sequence",
          bad == 0 && count >= 15, buf);
}

// 5. MPC cold start budget
void criterion_mpc_cold() {
  const ProblemData prob = build_mpc(MpcSpec{});
  Solver solver(prob);
  const auto t_begin = Clock::now();
  const SolveReport rep = solver.solve();
  const double secs = seconds_since(t_begin);
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s, %d Newton, %.3f s",
                to_string(rep.status), rep.cumulative_newton, secs);
  verdict(5, "MPC cold start <= 25 Newton",
          rep.status == SolveStatus::Optimal && rep.cumulative_newton <= 25 &&
              secs < 2.0,
          buf);
}

// 6. warm-start benefit
void criterion_warmstart() {
  const ProblemData prob = build_mpc(MpcSpec{});
  ExperimentGrid grid;
  const Baseline baseline = solve_baseline(prob);

  auto cell_median = [&](double t0, double eps, std::uint64_t idx) {
    auto rng = cell_rng(grid.rng_seed, idx);
    std::vector<int> counts;
    for (int trial = 0; trial < grid.trials_per_cell; ++trial) {
      SolverSettings st;
      st.t0 = t0;
      WarmStart warm;
      warm.x = perturb_uniform(baseline.x_star, eps, rng);
      warm.s = prob.b - prob.A * warm.x;
      counts.push_back(Solver(prob, st).solve(warm).cumulative_newton);
    }
    return median_of(counts);
  };

  const int med_tiny = cell_median(baseline.t_star, 1e-6, 0);
  const int med_small = cell_median(baseline.t_star, 1e-4, 1);
  const int cold = baseline.cold_newton;
  const double ratio = double(med_tiny) / double(cold);

  char buf[120];
  std::snprintf(buf, sizeof buf,
                "eps 1e-6: median %d; eps 1e-4: median %d; cold %d; ratio %.2f",
                med_tiny, med_small, cold, ratio);
  verdict(6, "warm-start benefit",
          med_tiny == 1 && med_small <= 6 && ratio <= 0.3, buf);
}

// 7. feasibility recovery flat curve
void criterion_recovery() {
  const ProblemData prob = build_mpc(MpcSpec{});
  const Baseline baseline = solve_baseline(prob);
  const auto levels = default_recover_levels(baseline.t_star, 20);
  std::uint64_t idx = 5000;
  int worst = 0;
  for (double t : levels) {
    auto rng = cell_rng(20240901, idx++);
    std::vector<int> counts;
    for (int trial = 0; trial < 11; ++trial) {
      WarmStart warm;
      warm.x = perturb_uniform(baseline.x_star, 0.001, rng);
      warm.s = prob.b - prob.A * warm.x;
      Solver solver(prob);
      const SolveReport rep = solver.recover_feasible(t, warm);
      counts.push_back(rep.status == SolveStatus::SuboptimalFeasible
                           ? rep.cumulative_newton
                           : 1000);
    }
    worst = std::max(worst, median_of(counts));
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "max median over 20 levels = %d", worst);
  verdict(7, "feasibility recovery flat at <= 3", worst <= 3, buf);
}

// 8. infeasibility family statistics
void criterion_infeasible_family() {
  const auto t_begin = Clock::now();
  const InfeasibleResult res = bench_infeasible();
  const double secs = seconds_since(t_begin);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d/%d Infeasible, newton min/max/median = %d/%d/%d, %.1f s",
                res.total - res.misclassified, res.total, res.min_newton,
                res.max_newton, res.median_newton, secs);
  verdict(8, "infeasible family stats",
          res.misclassified == 0 && res.min_newton >= 3 &&
              res.min_newton <= 7 && res.max_newton >= 7 &&
              res.max_newton <= 11 && res.median_newton >= 5 &&
              res.median_newton <= 9 && secs < 60.0,
          buf);
}

// 9. superlinear inner convergence
void criterion_superlinear() {
  ProblemData prob;
  prob.Q = make_sparse(2, 2, {Triplet(0, 0, 2.0), Triplet(1, 1, 4.0)});
  prob.p = Vec::Constant(2, 1.0);
  prob.A = make_sparse(2, 2, {Triplet(0, 0, 1.0), Triplet(1, 1, 1.0)});
  prob.b = Vec::Constant(2, 5.0);
  prob.cone.zero_dim = 2;
  FactorContext ctx(prob);
  NewtonWorkspace ws(2, 2);
  SolverSettings st;

  Vec xr = Vec::Constant(2, 20.0), sr = Vec::Constant(2, 20.0);
  solve_pa(prob, ctx, xr, sr, -100.0, 1e-14, st, ws);

  Vec x = Vec::Constant(2, 20.0), s = Vec::Constant(2, 20.0);
  std::vector<double> errs;
  for (int j = 0; j < 40; ++j) {
    SolverSettings one = st;
    one.max_inner = 1;
    solve_pa(prob, ctx, x, s, -100.0, 1e-15, one, ws);
    Vec z(4), zr(4);
    z << x, s;
    zr << xr, sr;
    errs.push_back((z - zr).norm());
    if (errs.back() < 1e-12) break;
  }
  bool ok = errs.size() >= 3;
  double last_ratio = 1.0;
  if (ok) {
    std::vector<double> ratios;
    for (size_t i = 1; i < errs.size(); ++i)
      if (errs[i - 1] > 1e-14) ratios.push_back(errs[i] / errs[i - 1]);
    ok = ratios.size() >= 2 && ratios.back() < 0.1;
    last_ratio = ratios.empty() ? 1.0 : ratios.back();
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "%zu error samples, final ratio %.2e",
                errs.size(), last_ratio);
  verdict(9, "superlinear inner tail", ok, buf);
}

// 10. allocation-free hot path, measured by the instrumented global new
void criterion_alloc() {
  const ProblemData prob = build_mpc(MpcSpec{});
  Solver solver(prob);
  SolveReport report;
  solver.solve(report, std::nullopt);  // prime every lazily sized buffer

  g_allocs.store(0);
  g_counting.store(true);
  solver.solve(report, std::nullopt);
  g_counting.store(false);
  const long allocs = g_allocs.load();

  char buf[120];
  std::snprintf(buf, sizeof buf, "%ld allocations in a primed full solve (%s)",
                allocs, to_string(report.status));
  verdict(10, "allocation-free hot path",
          allocs == 0 && report.status == SolveStatus::Optimal, buf);
}

}  // namespace

int main() {
  criterion_gradients();
  criterion_oracle_equivalence();
  criterion_toys();
  criterion_monotone();
  criterion_mpc_cold();
  criterion_warmstart();
  criterion_recovery();
  criterion_infeasible_family();
  criterion_superlinear();
  criterion_alloc();
  std::printf("%d of 10 criteria passed\n", 10 - g_failures);
  return g_failures;
}
