#pragma once

#include "pvm/problem.hpp"

namespace pvm {

enum class HessPattern { WITH_Q, WITHOUT_Q };
enum class StageMode { PA, PB };

// Evaluation of the merit function r(x,s,t) = 1/2 |R(x,s,t)|^2 with
// R = (max{q(x)-t,0}, Ax+s-b, s - proj_C(s)), plus its gradient pieces.
// All buffers are sized once; eval_merit never allocates.
struct MeritEval {
  double rq = 0.0;        // max{q(x) - t, 0}
  double q_minus_t = 0.0; // q(x) - t (sign carries the epigraph branch)
  Vec eq_residual;        // Ax + s - b
  Vec cone_residual;      // s - proj_C(s)
  double r_value = 0.0;
  double r0_value = 0.0;
  Vec grad_x;
  Vec grad_s;
  double grad_t = 0.0;    // == -rq
  Vec v;                  // Qx + p

  explicit MeritEval(int n = 0, int m = 0)
      : eq_residual(m), cone_residual(m), grad_x(n), grad_s(m), v(n) {}

  double grad_norm_xs() const {
    return std::sqrt(grad_x.squaredNorm() + grad_s.squaredNorm());
  }
  double grad_norm_xst() const {
    return std::sqrt(grad_x.squaredNorm() + grad_s.squaredNorm() +
                     grad_t * grad_t);
  }
};

inline void eval_merit(const ProblemData& prob, const Vec& x, const Vec& s,
                       double t, MeritEval& out) {
  const int m = prob.m();

  out.q_minus_t = prob.objective(x) - t;
  out.rq = std::max(out.q_minus_t, 0.0);
  out.grad_t = -out.rq;

  out.eq_residual = s - prob.b;
  out.eq_residual.noalias() += prob.A * x;

  for (int i = 0; i < m; ++i) {
    // zero-cone rows: dist component is s_i itself; nonneg rows: min(s_i, 0)
    out.cone_residual[i] =
        prob.cone.is_zero_row(i) ? s[i] : std::min(s[i], 0.0);
  }

  out.r0_value = 0.5 * (out.eq_residual.squaredNorm() +
                        out.cone_residual.squaredNorm());
  out.r_value = out.r0_value + 0.5 * out.rq * out.rq;

  prob.gradient_q(x, out.v);
  out.grad_x.noalias() = prob.A.transpose() * out.eq_residual;
  out.grad_x += out.rq * out.v;
  out.grad_s = out.eq_residual + out.cone_residual;
}

// Value of r only (used inside line searches, no gradient work).
inline double merit_value(const ProblemData& prob, const Vec& x, const Vec& s,
                          double t, Vec& eq_scratch) {
  const int m = prob.m();
  eq_scratch = s - prob.b;
  eq_scratch.noalias() += prob.A * x;
  double acc = eq_scratch.squaredNorm();
  for (int i = 0; i < m; ++i) {
    const double c = prob.cone.is_zero_row(i) ? s[i] : std::min(s[i], 0.0);
    acc += c * c;
  }
  const double rq = std::max(prob.objective(x) - t, 0.0);
  return 0.5 * (acc + rq * rq);
}

// Proximal centers of the stage objective phi_k (subproblem Pb).
struct ProxCenters {
  Vec x_half;
  Vec s_half;
  double t_k = 0.0;
};

// Stage objective phi(x,s,t) = r(x,s,t) + 1/(2 sigma) (|x-x_half|^2 +
// |s-s_half|^2 + (t-t_k)^2). Gradients are those of r shifted by the
// quadratic-center terms; `me` is left holding the plain merit evaluation.
struct ProxStageEval {
  double value = 0.0;
  Vec grad_x;
  Vec grad_s;
  double grad_t = 0.0;

  explicit ProxStageEval(int n = 0, int m = 0) : grad_x(n), grad_s(m) {}
};

inline void eval_prox_stage(const ProblemData& prob, const Vec& x, const Vec& s,
                            double t, const ProxCenters& c, double sigma,
                            MeritEval& me, ProxStageEval& out) {
  eval_merit(prob, x, s, t, me);
  const double inv = 1.0 / sigma;
  out.value = me.r_value +
              0.5 * inv * ((x - c.x_half).squaredNorm() +
                           (s - c.s_half).squaredNorm() +
                           (t - c.t_k) * (t - c.t_k));
  out.grad_x = me.grad_x + inv * (x - c.x_half);
  out.grad_s = me.grad_s + inv * (s - c.s_half);
  out.grad_t = me.grad_t + inv * (t - c.t_k);
}

inline double prox_stage_value(const ProblemData& prob, const Vec& x,
                               const Vec& s, double t, const ProxCenters& c,
                               double sigma, Vec& eq_scratch) {
  const double inv = 1.0 / sigma;
  return merit_value(prob, x, s, t, eq_scratch) +
         0.5 * inv * ((x - c.x_half).squaredNorm() +
                      (s - c.s_half).squaredNorm() +
                      (t - c.t_k) * (t - c.t_k));
}

// One element of the Clarke generalized Hessian of r (or of phi in PB mode),
// with theta = 1 on the kinks q(x) = t and s_i = 0.
struct HessianElement {
  HessPattern base_pattern = HessPattern::WITHOUT_Q;
  StageMode mode = StageMode::PA;
  Vec H_diag_s;        // I + Gamma(s), entries in {1, 2}
  double rq_scale = 0; // scalar multiplying Q inside H_x
  bool rank1_active = false;  // xi_q in {0,1}
  Vec rank1_vector;    // v = Qx + p; padded with zeros (and -1 in PB) by users
  double sigma_inv = 0.0;     // added to the diagonal in PB mode

  explicit HessianElement(int n = 0, int m = 0)
      : H_diag_s(m), rank1_vector(n) {}
};

inline void select_hessian(const ProblemData& prob, const MeritEval& me,
                           const Vec& s, double /*t*/, StageMode mode,
                           double sigma, HessianElement& out) {
  const int m = prob.m();
  out.mode = mode;
  out.sigma_inv = (mode == StageMode::PB) ? 1.0 / sigma : 0.0;
  out.base_pattern = me.rq > 0.0 ? HessPattern::WITH_Q : HessPattern::WITHOUT_Q;
  out.rq_scale = me.rq;
  out.rank1_active = me.q_minus_t >= 0.0;  // xi_q = 1 also on the tie q(x) = t
  out.rank1_vector = me.v;
  for (int i = 0; i < m; ++i) {
    // xi_s = 1 for s_i <= 0 (theta = 1 at the kink); zero-cone rows always 1
    const bool active = prob.cone.is_zero_row(i) || s[i] <= 0.0;
    out.H_diag_s[i] = active ? 2.0 : 1.0;
  }
}

}  // namespace pvm
