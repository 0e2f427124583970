#pragma once

#include "pvm/solver.hpp"

namespace pvm {

// Linear-quadratic MPC family: tridiagonal slightly-unstable dynamics with
// box constraints on states and inputs, condensed into the sparse QP form
// with decision vector x = (z_1..z_H, u_1..u_H). The initial state enters
// only through b.
struct MpcSpec {
  int horizon = 20;
  int state_dim = 3;
  int input_dim = 3;
  double Q_weight = 100.0;
  double R_weight = 0.01;
  double u_max = 0.01;
  double z_max = 1.0;
  // Default initial state calibrated so the baseline instance has optimal
  // cost 0.1819 with the input bounds active.
  Vec z0_hat = Vec::Constant(3, 0.030708722450);
  Eigen::MatrixXd A_sys = make_default_A();
  Eigen::MatrixXd B_sys = Eigen::MatrixXd::Identity(3, 3);
  double objective_scale = 1.0;

  static Eigen::MatrixXd make_default_A() {
    Eigen::MatrixXd A(3, 3);
    A << 1.01, 0.01, 0.00,
         0.01, 1.01, 0.01,
         0.00, 0.01, 1.01;
    return A;
  }

  int n_vars() const { return horizon * (state_dim + input_dim); }
  int n_zero_rows() const { return horizon * state_dim; }
  int n_nonneg_rows() const {
    return 2 * horizon * (input_dim + state_dim);
  }
};

inline ProblemData build_mpc(const MpcSpec& spec) {
  const int H = spec.horizon;
  const int ns = spec.state_dim;
  const int ni = spec.input_dim;
  const int n = spec.n_vars();
  const int mz = spec.n_zero_rows();
  const int m = mz + spec.n_nonneg_rows();
  const int u0 = H * ns;  // offset of the input block

  ProblemData prob;
  prob.p = Vec::Zero(n);
  prob.b = Vec::Zero(m);
  prob.cone.zero_dim = mz;
  prob.cone.nonneg_dim = m - mz;

  // objective: sum z'Qz + u'Ru  ->  1/2 x' (2 blkdiag(Q..,R..)) x
  std::vector<Triplet> qt;
  qt.reserve(n);
  for (int i = 0; i < H * ns; ++i)
    qt.emplace_back(i, i, 2.0 * spec.Q_weight * spec.objective_scale);
  for (int i = 0; i < H * ni; ++i)
    qt.emplace_back(u0 + i, u0 + i, 2.0 * spec.R_weight * spec.objective_scale);
  prob.Q = make_sparse(n, n, qt);

  std::vector<Triplet> at;
  // dynamics z_i = A_sys z_{i-1} + B_sys u_i (z_0 = z0_hat folded into b)
  for (int i = 1; i <= H; ++i) {
    for (int c = 0; c < ns; ++c) {
      const int row = ns * (i - 1) + c;
      at.emplace_back(row, ns * (i - 1) + c, 1.0);
      if (i > 1)
        for (int d = 0; d < ns; ++d)
          if (spec.A_sys(c, d) != 0.0)
            at.emplace_back(row, ns * (i - 2) + d, -spec.A_sys(c, d));
      for (int d = 0; d < ni; ++d)
        if (spec.B_sys(c, d) != 0.0)
          at.emplace_back(row, u0 + ni * (i - 1) + d, -spec.B_sys(c, d));
    }
    if (i == 1) {
      const Vec rhs = spec.A_sys * spec.z0_hat;
      for (int c = 0; c < ns; ++c) prob.b[c] = rhs[c];
    }
  }
  // box rows: u upper, u lower, z upper, z lower
  int row = mz;
  for (int i = 0; i < H * ni; ++i, ++row) {
    at.emplace_back(row, u0 + i, 1.0);
    prob.b[row] = spec.u_max;
  }
  for (int i = 0; i < H * ni; ++i, ++row) {
    at.emplace_back(row, u0 + i, -1.0);
    prob.b[row] = spec.u_max;
  }
  for (int i = 0; i < H * ns; ++i, ++row) {
    at.emplace_back(row, i, 1.0);
    prob.b[row] = spec.z_max;
  }
  for (int i = 0; i < H * ns; ++i, ++row) {
    at.emplace_back(row, i, -1.0);
    prob.b[row] = spec.z_max;
  }
  prob.A = make_sparse(m, n, at);
  prob.name = "mpc";
  return prob;
}

#ifndef PVM_INFEASIBLE_FAMILY_SCALE
#define PVM_INFEASIBLE_FAMILY_SCALE 1e-5
#endif
inline constexpr double kInfeasibleFamilyScale = PVM_INFEASIBLE_FAMILY_SCALE;

// 72 deliberately infeasible instances: aggressive initial state with
// unsatisfiable (negative-radius) input boxes and tight state boxes.
inline std::vector<ProblemData> build_infeasible_family() {
  std::vector<ProblemData> out;
  for (int iu = 1; iu <= 9; ++iu) {        // u_max in {-0.01, ..., -0.09}
    for (int iz = 0; iz < 8; ++iz) {       // z_max in {0.10, 0.15, ..., 0.45}
      MpcSpec spec;
      spec.z0_hat = Vec::Constant(3, 1.0);
      spec.u_max = -0.01 * iu;
      spec.z_max = 0.10 + 0.05 * iz;
      // Keep the cost on the same footing as the feasible baseline: with the
      // aggressive initial state the raw objective sits two to three orders
      // of magnitude higher, which pushes the value-function plateau far out
      // and slows the level climb that precedes the certificate.
      spec.objective_scale = kInfeasibleFamilyScale;
      ProblemData prob = build_mpc(spec);
      prob.name = "mpc_infeasible_u" + std::to_string(iu) + "_z" +
                  std::to_string(iz);
      out.push_back(std::move(prob));
    }
  }
  return out;
}

// Rescales Q and p so the optimal value equals `target`; the feasible set
// and the argmin are unchanged. One accurate solve determines the factor.
inline ProblemData scale_objective(const ProblemData& prob, double target) {
  SolverSettings st;
  st.eps_opt = 1e-9;
  Solver solver(prob, st);
  const SolveReport rep = solver.solve();
  if (rep.status != SolveStatus::Optimal)
    throw std::runtime_error("scale_objective: problem did not solve to "
                             "optimality (" + std::string(to_string(rep.status)) + ")");
  if (std::abs(rep.t_final) < 1e-12)
    throw std::runtime_error("scale_objective: optimal value is zero");
  const double factor = target / rep.t_final;
  ProblemData scaled = prob;
  scaled.Q *= factor;
  scaled.p *= factor;
  return scaled;
}

}  // namespace pvm
