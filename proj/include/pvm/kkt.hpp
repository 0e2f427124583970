#pragma once

#include <algorithm>
#include <utility>

#include "pvm/ldl.hpp"
#include "pvm/merit.hpp"
#include "pvm/problem.hpp"

namespace pvm {

// Factorization context for the (n+m) x (n+m) Newton matrix
//   H = [ A'A + rq*Q + shift*I ,  A' ]
//       [ A                    ,  I + Gamma(s) + shift*I ]
// Only the two possible sparsity patterns (with and without the Q block)
// are analyzed, once, at setup; refactorization and solves are
// allocation-free. The dense rank-1 epigraph term is handled by a
// Sherman-Morrison update around the factored matrix.
class FactorContext {
 public:
  struct Pattern {
    std::vector<int> Ap, Ai;
    std::vector<double> Ax;
    std::vector<int> map_ata;  // slot of each nnz of upper(A'A)
    std::vector<int> map_q;    // slot of each nnz of upper(Q); empty w/o Q
    std::vector<int> map_at;   // slot of each nnz of A (CSC order of A)
    std::vector<int> diag_pos; // slot of each diagonal entry
    LdlFactor ldl;

    int nnz() const { return static_cast<int>(Ai.size()); }
  };

  FactorContext() = default;

  explicit FactorContext(const ProblemData& prob) { setup(prob); }

  void setup(const ProblemData& prob) {
    n_ = prob.n();
    m_ = prob.m();
    const SpMat At = prob.A.transpose();
    SpMat ata_full = (At * prob.A).pruned();
    ata_upper_ = ata_full.triangularView<Eigen::Upper>();
    ata_upper_.makeCompressed();

    build_pattern(prob, /*with_q=*/true, with_q_);
    build_pattern(prob, /*with_q=*/false, without_q_);
    with_q_.ldl.analyze(dim(), with_q_.Ap.data(), with_q_.Ai.data());
    without_q_.ldl.analyze(dim(), without_q_.Ap.data(), without_q_.Ai.data());

    y_.resize(dim());
    z_.resize(dim());
  }

  int dim() const { return n_ + m_; }
  const Pattern& pattern(HessPattern which) const {
    return which == HessPattern::WITH_Q ? with_q_ : without_q_;
  }

  // Numeric LDL' of H + mu*I (rank-1 term excluded). In PB mode the
  // sigma^{-1} shift carried by the element is added as well.
  bool refactor(const ProblemData& prob, const HessianElement& helem,
                double mu) {
    Pattern& pat = helem.base_pattern == HessPattern::WITH_Q ? with_q_
                                                             : without_q_;
    active_ = helem.base_pattern;
    const double shift = mu + helem.sigma_inv;

    std::fill(pat.Ax.begin(), pat.Ax.end(), 0.0);
    {
      int k = 0;
      for (int j = 0; j < ata_upper_.outerSize(); ++j)
        for (SpMat::InnerIterator it(ata_upper_, j); it; ++it)
          pat.Ax[pat.map_ata[k++]] += it.value();
    }
    if (!pat.map_q.empty() && helem.rq_scale != 0.0) {
      int k = 0;
      for (int j = 0; j < prob.Q.outerSize(); ++j)
        for (SpMat::InnerIterator it(prob.Q, j); it; ++it)
          pat.Ax[pat.map_q[k++]] += helem.rq_scale * it.value();
    }
    {
      int k = 0;
      for (int j = 0; j < prob.A.outerSize(); ++j)
        for (SpMat::InnerIterator it(prob.A, j); it; ++it)
          pat.Ax[pat.map_at[k++]] += it.value();
    }
    for (int i = 0; i < n_; ++i) pat.Ax[pat.diag_pos[i]] += shift;
    for (int i = 0; i < m_; ++i)
      pat.Ax[pat.diag_pos[n_ + i]] += helem.H_diag_s[i] + shift;

    return pat.ldl.factorize(pat.Ap.data(), pat.Ai.data(), pat.Ax.data());
  }

  // d solves (H_bar + xi u u') d = -g with u = (u_x, 0_m). Returns false on
  // Sherman-Morrison breakdown.
  bool solve_rank1(const Vec& g, bool xi, const Vec& u_x, Vec& d) {
    const Pattern& pat = pattern(active_);
    y_ = -g;
    pat.ldl.solve(y_.data());
    if (!xi) {
      d = y_;
      return true;
    }
    z_.setZero();
    z_.head(n_) = u_x;
    pat.ldl.solve(z_.data());
    const double uy = u_x.dot(y_.head(n_));
    const double uz = u_x.dot(z_.head(n_));
    const double denom = 1.0 + uz;
    if (std::abs(denom) < 1e-14) return false;
    d = y_ - (uy / denom) * z_;
    return true;
  }

  // Bordered PB solve: the full matrix is diag(H_bar, sigma^{-1}) plus the
  // rank-1 term xi w w' with w = (u_x, 0_m, -1); the t coordinate is handled
  // analytically around the factored (n+m) block.
  bool solve_rank1_bordered(const Vec& g_xs, double g_t, bool xi,
                            const Vec& u_x, double sigma, Vec& d_xs,
                            double& d_t) {
    const Pattern& pat = pattern(active_);
    y_ = -g_xs;
    pat.ldl.solve(y_.data());
    const double y_t = -sigma * g_t;
    if (!xi) {
      d_xs = y_;
      d_t = y_t;
      return true;
    }
    z_.setZero();
    z_.head(n_) = u_x;
    pat.ldl.solve(z_.data());
    const double z_t = -sigma;
    const double uy = u_x.dot(y_.head(n_)) - y_t;
    const double uz = u_x.dot(z_.head(n_)) - z_t;
    const double denom = 1.0 + uz;
    if (std::abs(denom) < 1e-14) return false;
    const double coef = uy / denom;
    d_xs = y_ - coef * z_;
    d_t = y_t - coef * z_t;
    return true;
  }

  HessPattern active_pattern() const { return active_; }

 private:
  void build_pattern(const ProblemData& prob, bool with_q, Pattern& pat) {
    std::vector<std::pair<int, int>> pos;  // (col, row), row <= col
    auto add = [&pos](int row, int col) { pos.emplace_back(col, row); };

    for (int j = 0; j < ata_upper_.outerSize(); ++j)
      for (SpMat::InnerIterator it(ata_upper_, j); it; ++it)
        add(static_cast<int>(it.row()), static_cast<int>(it.col()));
    if (with_q)
      for (int j = 0; j < prob.Q.outerSize(); ++j)
        for (SpMat::InnerIterator it(prob.Q, j); it; ++it)
          add(static_cast<int>(it.row()), static_cast<int>(it.col()));
    for (int j = 0; j < prob.A.outerSize(); ++j)
      for (SpMat::InnerIterator it(prob.A, j); it; ++it)
        add(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()));
    for (int i = 0; i < dim(); ++i) add(i, i);

    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());

    pat.Ap.assign(dim() + 1, 0);
    pat.Ai.resize(pos.size());
    pat.Ax.assign(pos.size(), 0.0);
    for (size_t k = 0; k < pos.size(); ++k) {
      pat.Ap[pos[k].first + 1]++;
      pat.Ai[k] = pos[k].second;
    }
    for (int j = 0; j < dim(); ++j) pat.Ap[j + 1] += pat.Ap[j];

    auto slot_of = [&pos](int row, int col) {
      auto it = std::lower_bound(pos.begin(), pos.end(),
                                 std::make_pair(col, row));
      return static_cast<int>(it - pos.begin());
    };

    pat.map_ata.clear();
    for (int j = 0; j < ata_upper_.outerSize(); ++j)
      for (SpMat::InnerIterator it(ata_upper_, j); it; ++it)
        pat.map_ata.push_back(slot_of(static_cast<int>(it.row()),
                                      static_cast<int>(it.col())));
    pat.map_q.clear();
    if (with_q)
      for (int j = 0; j < prob.Q.outerSize(); ++j)
        for (SpMat::InnerIterator it(prob.Q, j); it; ++it)
          pat.map_q.push_back(slot_of(static_cast<int>(it.row()),
                                      static_cast<int>(it.col())));
    pat.map_at.clear();
    for (int j = 0; j < prob.A.outerSize(); ++j)
      for (SpMat::InnerIterator it(prob.A, j); it; ++it)
        pat.map_at.push_back(slot_of(static_cast<int>(it.col()),
                                     n_ + static_cast<int>(it.row())));
    pat.diag_pos.clear();
    for (int i = 0; i < dim(); ++i) pat.diag_pos.push_back(slot_of(i, i));
  }

  int n_ = 0, m_ = 0;
  SpMat ata_upper_;
  Pattern with_q_, without_q_;
  HessPattern active_ = HessPattern::WITHOUT_Q;
  Vec y_, z_;
};

}  // namespace pvm
