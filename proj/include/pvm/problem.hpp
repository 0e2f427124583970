#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvm {

using Vec   = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Cone of the slack variable: zero-cone rows (equalities) first, then
// nonnegative-orthant rows. The split must cover all rows of A.
struct ConeSpec {
  int zero_dim   = 0;
  int nonneg_dim = 0;

  int rows() const { return zero_dim + nonneg_dim; }
  bool is_zero_row(int i) const { return i < zero_dim; }
};

// Sparse convex QP:  min 1/2 x'Qx + p'x  s.t.  Ax + s = b, s in C.
// Q is stored as its upper triangle only.
struct ProblemData {
  SpMat Q;  // n x n, upper triangle
  Vec p;    // n
  SpMat A;  // m x n
  Vec b;    // m
  ConeSpec cone;
  std::optional<double> t0;  // user-supplied lower bound on the optimal cost
  std::string name;

  int n() const { return static_cast<int>(p.size()); }
  int m() const { return static_cast<int>(b.size()); }

  // 1/2 x'Qx + p'x with Q expanded from its upper triangle.
  double objective(const Vec& x) const {
    double acc = 0.0;
    for (int j = 0; j < Q.outerSize(); ++j)
      for (SpMat::InnerIterator it(Q, j); it; ++it) {
        const double xx = x[it.row()] * x[it.col()];
        acc += (it.row() == it.col()) ? 0.5 * it.value() * xx : it.value() * xx;
      }
    return acc + p.dot(x);
  }

  // out = Qx + p, allocation-free.
  void gradient_q(const Vec& x, Vec& out) const {
    out = p;
    for (int j = 0; j < Q.outerSize(); ++j)
      for (SpMat::InnerIterator it(Q, j); it; ++it) {
        out[it.row()] += it.value() * x[it.col()];
        if (it.row() != it.col()) out[it.col()] += it.value() * x[it.row()];
      }
  }
};

enum class Violation {
  DimensionMismatch,
  ConeDimMismatch,
  IndexOutOfRange,
  NegativeDiagonal,
  NonFiniteEntry,
  NotSquare,
};

inline const char* to_string(Violation v) {
  switch (v) {
    case Violation::DimensionMismatch: return "DimensionMismatch";
    case Violation::ConeDimMismatch: return "ConeDimMismatch";
    case Violation::IndexOutOfRange: return "IndexOutOfRange";
    case Violation::NegativeDiagonal: return "NegativeDiagonal";
    case Violation::NonFiniteEntry: return "NonFiniteEntry";
    case Violation::NotSquare: return "NotSquare";
  }
  return "?";
}

inline bool all_finite(const SpMat& M) {
  for (int j = 0; j < M.outerSize(); ++j)
    for (SpMat::InnerIterator it(M, j); it; ++it)
      if (!std::isfinite(it.value())) return false;
  return true;
}

inline std::vector<Violation> validate(const ProblemData& prob) {
  std::vector<Violation> out;
  const int n = prob.n();
  const int m = prob.m();
  if (prob.Q.rows() != prob.Q.cols()) out.push_back(Violation::NotSquare);
  if (prob.Q.rows() != n || prob.A.cols() != n || prob.A.rows() != m)
    out.push_back(Violation::DimensionMismatch);
  if (prob.cone.rows() != m || prob.cone.zero_dim < 0 || prob.cone.nonneg_dim < 0)
    out.push_back(Violation::ConeDimMismatch);
  if (!all_finite(prob.Q) || !all_finite(prob.A) || !prob.p.allFinite() ||
      !prob.b.allFinite())
    out.push_back(Violation::NonFiniteEntry);
  // PSD spot check only; full PSD verification is left to test oracles.
  for (int j = 0; j < prob.Q.outerSize(); ++j)
    for (SpMat::InnerIterator it(prob.Q, j); it; ++it)
      if (it.row() == it.col() && it.value() < 0.0) {
        out.push_back(Violation::NegativeDiagonal);
        j = static_cast<int>(prob.Q.outerSize());
        break;
      }
  return out;
}

// Canonical upper-triangle form of Q from arbitrary triplets. If any
// strictly-lower entry is present the input is treated as a full matrix and
// symmetrized as (Q + Q')/2; otherwise it is taken as upper-triangle storage.
inline SpMat make_symmetric_upper(int n, const std::vector<Triplet>& trips) {
  bool has_lower = false;
  for (const auto& t : trips)
    if (t.row() > t.col()) { has_lower = true; break; }

  SpMat upper(n, n);
  if (!has_lower) {
    upper.setFromTriplets(trips.begin(), trips.end());
  } else {
    SpMat full(n, n);
    full.setFromTriplets(trips.begin(), trips.end());
    SpMat fullT = full.transpose();
    SpMat sym = 0.5 * (full + fullT);
    upper = sym.triangularView<Eigen::Upper>();
  }
  upper.makeCompressed();
  return upper;
}

inline SpMat make_sparse(int rows, int cols, const std::vector<Triplet>& trips) {
  SpMat M(rows, cols);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

// Everything from the termination/schedule description plus plumbing caps.
struct SolverSettings {
  double eps_opt  = 1e-4;   // stationarity tolerance on |grad_t r| and delta_beta
  double eps_con  = 1e-8;   // feasibility tolerance on r
  double sigma0   = 1e4;    // initial proximal weight
  double delta0   = 1e-2;   // initial inner gradient tolerance
  double delta_shrink    = 0.1;
  double sigma_cap       = 1e12;
  int    max_outer       = 50;
  int    max_inner       = 200;
  double armijo_c        = 1e-4;
  double backtrack_factor = 0.5;
  int    max_backtracks  = 50;
  std::optional<double> t0;

  bool valid() const {
    return eps_opt > 0 && eps_con > 0 && sigma0 > 0 && delta0 > 0 &&
           delta_shrink > 0 && delta_shrink < 1 && sigma_cap > 0 &&
           max_outer > 0 && max_inner > 0 && armijo_c > 0 && armijo_c < 1 &&
           backtrack_factor > 0 && backtrack_factor < 1 && max_backtracks > 0;
  }
};

}  // namespace pvm
