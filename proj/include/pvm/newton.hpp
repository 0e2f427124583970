#pragma once

#include "pvm/kkt.hpp"
#include "pvm/merit.hpp"
#include "pvm/problem.hpp"

namespace pvm {

enum class NewtonStatus { Converged, IterLimit, LineSearchStall };

struct NewtonOutcome {
  NewtonStatus status = NewtonStatus::Converged;
  double grad_norm = 0.0;
  int iters = 0;
};

// Entry gradients at or below this floor are treated as exact stationarity;
// otherwise at least one Newton step is taken before the tolerance is tested.
inline constexpr double kStationaryFloor = 1e-12;

inline constexpr double kMuMax = 1e6;

// Levenberg shift proportional to the gradient norm keeps the step well
// defined when the merit Hessian is singular, while vanishing fast enough
// near a solution to preserve the superlinear tail. A full-strength shift
// (scale 1) roughly halves early cold-start progress per step, so it is
// applied at reduced strength.
#ifndef PVM_MU_SCALE
#define PVM_MU_SCALE 1e-3
#endif
inline constexpr double kMuScale = PVM_MU_SCALE;
inline constexpr int kMaxMuEscalations = 5;

// Per-iteration level movement below which a gradient-converged prox stage
// is also considered settled in t (see solve_pb).
inline constexpr double kTProgressTol = 1e-8;

struct NewtonWorkspace {
  MeritEval me;
  ProxStageEval pe;
  HessianElement helem;
  Vec g, d, x_trial, s_trial, eq_scratch;

  NewtonWorkspace(int n, int m)
      : me(n, m), pe(n, m), helem(n, m), g(n + m), d(n + m), x_trial(n),
        s_trial(m), eq_scratch(m) {}
};

// Backtracking line search: largest rho in {1, beta, beta^2, ...} with
// f(rho) <= f0 + c * rho * slope. Caller guarantees slope < 0.
template <typename F>
double armijo_search(F&& value_at, double f0, double slope,
                     const SolverSettings& st, bool& stalled) {
  double rho = 1.0;
  for (int i = 0; i < st.max_backtracks; ++i) {
    if (value_at(rho) <= f0 + st.armijo_c * rho * slope) {
      stalled = false;
      return rho;
    }
    rho *= st.backtrack_factor;
  }
  stalled = true;
  return 0.0;
}

// Subproblem Pa: minimize r(x,s,t) over (x,s) at fixed t to gradient
// tolerance `tol`. Updates (x, s) in place.
inline NewtonOutcome solve_pa(const ProblemData& prob, FactorContext& ctx,
                              Vec& x, Vec& s, double t, double tol,
                              const SolverSettings& st, NewtonWorkspace& ws) {
  const int n = prob.n();
  const int m = prob.m();
  NewtonOutcome out;

  eval_merit(prob, x, s, t, ws.me);
  double gn = ws.me.grad_norm_xs();
  out.grad_norm = gn;
  if (gn <= std::min(tol, kStationaryFloor)) return out;

  for (int j = 1; j <= st.max_inner; ++j) {
    select_hessian(prob, ws.me, s, t, StageMode::PA, 0.0, ws.helem);
    // mu_j = |grad r| clipped; escalated on factorization breakdown
    double mu = kMuScale * std::min(gn, kMuMax);
    ws.g.head(n) = ws.me.grad_x;
    ws.g.tail(m) = ws.me.grad_s;
    bool ok = false;
    for (int esc = 0; esc <= kMaxMuEscalations && !ok; ++esc) {
      ok = ctx.refactor(prob, ws.helem, mu) &&
           ctx.solve_rank1(ws.g, ws.helem.rank1_active, ws.helem.rank1_vector,
                           ws.d);
      if (!ok) mu = std::max(10.0 * mu, 1e-10);
    }
    if (!ok) {
      out.status = NewtonStatus::LineSearchStall;
      return out;
    }

    double slope = ws.g.dot(ws.d);
    if (slope >= 0.0) {  // rounding produced an ascent direction
      ws.d = -ws.g;
      slope = -ws.g.squaredNorm();
    }

    bool stalled = false;
    const double rho = armijo_search(
        [&](double r) {
          ws.x_trial = x + r * ws.d.head(n);
          ws.s_trial = s + r * ws.d.tail(m);
          return merit_value(prob, ws.x_trial, ws.s_trial, t, ws.eq_scratch);
        },
        ws.me.r_value, slope, st, stalled);
    if (stalled) {
      out.status =
          gn <= tol ? NewtonStatus::Converged : NewtonStatus::LineSearchStall;
      return out;
    }

    x += rho * ws.d.head(n);
    s += rho * ws.d.tail(m);
    eval_merit(prob, x, s, t, ws.me);
    gn = ws.me.grad_norm_xs();
    out.grad_norm = gn;
    out.iters = j;
    if (gn <= tol) return out;
  }
  out.status = NewtonStatus::IterLimit;
  return out;
}

// Subproblem Pb: the proximal step on the value function. The stage
// objective penalizes the level only, phi(x,s,t) = r(x,s,t) +
// (t - t_k)^2 / (2 sigma), with (x,s) free; the centers supply the Newton
// start. Penalizing (x,s) as well reads as an equivalent two-step scheme,
// but at large sigma that step becomes a projection onto the feasible
// epigraph set, which lands strictly above the optimal value whenever the
// start is far in (x,s). With the level-only penalty every exact step stays
// at or below the optimal value. Updates (x, s, t) in place.
inline NewtonOutcome solve_pb(const ProblemData& prob, FactorContext& ctx,
                              Vec& x, Vec& s, double& t,
                              const ProxCenters& centers, double sigma,
                              double tol, const SolverSettings& st,
                              NewtonWorkspace& ws) {
  const int n = prob.n();
  const int m = prob.m();
  NewtonOutcome out;

  const double t_k = centers.t_k;
  double g_t = 0.0;
  auto eval_stage = [&]() {
    eval_merit(prob, x, s, t, ws.me);
    g_t = ws.me.grad_t + (t - t_k) / sigma;
    return std::sqrt(ws.me.grad_x.squaredNorm() + ws.me.grad_s.squaredNorm() +
                     g_t * g_t);
  };
  // Exact minimization of the stage objective in t alone at the final (x, s).
  // Once the epigraph term goes inactive the t-curvature collapses to 1/sigma
  // and the gradient test tolerates large t-error; the coordinate minimum
  // t̂ + sigma (q - t̂)/(1 + sigma) (or t̂ when q < t̂) is analytic and removes
  // that slop without increasing the objective.
  auto polish_t = [&]() {
    const double q = prob.objective(x);
    t = q >= t_k ? t_k + sigma * (q - t_k) / (1.0 + sigma) : t_k;
  };
  double gn = eval_stage();
  out.grad_norm = gn;
  if (gn <= std::min(tol, kStationaryFloor)) return out;

  for (int j = 1; j <= st.max_inner; ++j) {
    // level-only penalty: the (x,s) block carries no sigma shift, so select
    // in PA mode; the bordered solve supplies the 1/sigma level curvature.
    select_hessian(prob, ws.me, s, t, StageMode::PA, 0.0, ws.helem);
    ws.g.head(n) = ws.me.grad_x;
    ws.g.tail(m) = ws.me.grad_s;
    double d_t = 0.0;
    double mu = 0.0;
    bool ok = false;
    for (int esc = 0; esc <= kMaxMuEscalations && !ok; ++esc) {
      ok = ctx.refactor(prob, ws.helem, mu) &&
           ctx.solve_rank1_bordered(ws.g, g_t, ws.helem.rank1_active,
                                    ws.helem.rank1_vector, sigma, ws.d, d_t);
      if (!ok) mu = std::max(10.0 * mu, 1e-10);
    }
    if (!ok) {
      out.status = NewtonStatus::LineSearchStall;
      return out;
    }

    double slope = ws.g.dot(ws.d) + g_t * d_t;
    if (slope >= 0.0) {
      ws.d = -ws.g;
      d_t = -g_t;
      slope = -(ws.g.squaredNorm() + g_t * g_t);
    }

    const double phi0 = ws.me.r_value + (t - t_k) * (t - t_k) / (2.0 * sigma);
    bool stalled = false;
    const double rho = armijo_search(
        [&](double r) {
          ws.x_trial = x + r * ws.d.head(n);
          ws.s_trial = s + r * ws.d.tail(m);
          const double tt = t + r * d_t;
          return merit_value(prob, ws.x_trial, ws.s_trial, tt, ws.eq_scratch) +
                 (tt - t_k) * (tt - t_k) / (2.0 * sigma);
        },
        phi0, slope, st, stalled);
    if (stalled) {
      out.status =
          gn <= tol ? NewtonStatus::Converged : NewtonStatus::LineSearchStall;
      if (out.status == NewtonStatus::Converged) polish_t();
      return out;
    }

    x += rho * ws.d.head(n);
    s += rho * ws.d.tail(m);
    t += rho * d_t;
    // re-minimizing in t after every step never increases the objective and
    // prevents the zigzag across the epigraph kink that the 1/sigma
    // t-curvature otherwise induces
    const double t_before = t;
    polish_t();
    const double t_step = std::abs(t - t_before) + std::abs(rho * d_t);
    gn = eval_stage();
    out.grad_norm = gn;
    out.iters = j;
    // When the epigraph curvature degenerates (cost direction flat at the
    // solution) the gradient dips below tol while the level still drifts by
    // orders of magnitude more; keep iterating until the level settles too.
    // Only the near-feasible regime needs this: on an infeasibility plateau
    // the level keeps climbing by design and its exact value is not reported.
    if (gn <= tol &&
        (ws.me.r_value > st.eps_con ||
         t_step <= kTProgressTol * std::max(1.0, std::abs(t))))
      return out;
  }
  out.status = NewtonStatus::IterLimit;
  return out;
}

}  // namespace pvm
