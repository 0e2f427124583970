#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "pvm/pvm.hpp"

using namespace pvm;
using oracle::Mat;
using oracle::Vec;

namespace {

// dense mirror of the matrix the context factored
Mat assemble_dense(const ProblemData& prob, const HessianElement& he,
                   double mu) {
  const int n = prob.n();
  const int m = prob.m();
  const Mat Ad(prob.A);
  const Mat Qd = oracle::dense_symmetric(prob.Q);
  Mat H = Mat::Zero(n + m, n + m);
  H.topLeftCorner(n, n) = Ad.transpose() * Ad;
  if (he.base_pattern == HessPattern::WITH_Q)
    H.topLeftCorner(n, n) += he.rq_scale * Qd;
  H.topRightCorner(n, m) = Ad.transpose();
  H.bottomLeftCorner(m, n) = Ad;
  for (int i = 0; i < m; ++i) H(n + i, n + i) = he.H_diag_s[i];
  H.diagonal().array() += mu + he.sigma_inv;
  return H;
}

}  // namespace

TEST_CASE("hand 2x2 solve") {
  // A = [1], Q = 0 pattern, rq = 0, s > 0: H = [[1+mu, 1], [1, 2+mu]]
  ProblemData prob;
  prob.Q = make_sparse(1, 1, {});
  prob.p = Vec::Zero(1);
  prob.A = make_sparse(1, 1, {Triplet(0, 0, 1.0)});
  prob.b = Vec::Zero(1);
  prob.cone.nonneg_dim = 1;

  FactorContext ctx(prob);
  HessianElement he(1, 1);
  he.base_pattern = HessPattern::WITHOUT_Q;
  he.H_diag_s[0] = 2.0;
  REQUIRE(ctx.refactor(prob, he, 0.0));

  Vec g(2), d(2);
  g << -1.0, 0.0;  // solve H d = (1, 0)
  REQUIRE(ctx.solve_rank1(g, false, Vec::Zero(1), d));
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(-1.0));
}

TEST_CASE("hand Sherman-Morrison case") {
  // H = I2 (via A = 0 row trick is awkward; use the formula directly on a
  // problem whose assembled matrix is the identity after the unit shifts)
  ProblemData prob;
  prob.Q = make_sparse(1, 1, {});
  prob.p = Vec::Zero(1);
  prob.A = make_sparse(1, 1, {});  // empty column
  prob.b = Vec::Zero(1);
  prob.cone.nonneg_dim = 1;

  FactorContext ctx(prob);
  HessianElement he(1, 1);
  he.base_pattern = HessPattern::WITHOUT_Q;
  he.H_diag_s[0] = 0.0;                  // shift supplies the whole diagonal
  REQUIRE(ctx.refactor(prob, he, 1.0));  // H_bar = I2

  // (I + uu')d = -g with u = (1, 0), g = (1, 1) -> d = (-1/2, -1)
  Vec g(2), d(2), u(1);
  g << 1.0, 1.0;
  u << 1.0;
  REQUIRE(ctx.solve_rank1(g, true, u, d));
  CHECK(d[0] == doctest::Approx(-0.5));
  CHECK(d[1] == doctest::Approx(-1.0));
}

TEST_CASE("xi = 0 reduces to the plain factored solve") {
  std::mt19937_64 rng(3);
  const ProblemData prob = oracle::random_feasible_qp(rng, 5, 7, 2);
  FactorContext ctx(prob);
  MeritEval me(5, 7);
  HessianElement he(5, 7);
  std::normal_distribution<double> gauss;
  Vec x(5), s(7);
  for (int i = 0; i < 5; ++i) x[i] = gauss(rng);
  for (int i = 0; i < 7; ++i) s[i] = gauss(rng);
  eval_merit(prob, x, s, 100.0, me);  // huge t: epigraph inactive
  select_hessian(prob, me, s, 100.0, StageMode::PA, 0.0, he);
  REQUIRE(!he.rank1_active);
  REQUIRE(ctx.refactor(prob, he, 0.0));

  Vec g(12), d(12);
  for (int i = 0; i < 12; ++i) g[i] = gauss(rng);
  REQUIRE(ctx.solve_rank1(g, false, he.rank1_vector, d));
  const Mat H = assemble_dense(prob, he, 0.0);
  CHECK((H * d + g).norm() <= 1e-10 * (1.0 + g.norm()));
}

TEST_CASE("rank-1 solve matches a dense oracle") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemData prob = oracle::random_feasible_qp(rng, 8, 12, 3);
    FactorContext ctx(prob);
    MeritEval me(8, 12);
    HessianElement he(8, 12);
    Vec x(8), s(12);
    for (int i = 0; i < 8; ++i) x[i] = gauss(rng);
    for (int i = 0; i < 12; ++i) s[i] = gauss(rng);
    eval_merit(prob, x, s, -100.0, me);  // epigraph active: rq > 0
    select_hessian(prob, me, s, -100.0, StageMode::PA, 0.0, he);
    REQUIRE(he.rank1_active);
    const double mu = 1e-6;
    REQUIRE(ctx.refactor(prob, he, mu));

    Vec g(20), d(20);
    for (int i = 0; i < 20; ++i) g[i] = gauss(rng);
    REQUIRE(ctx.solve_rank1(g, true, he.rank1_vector, d));

    Mat H = assemble_dense(prob, he, mu);
    Vec u = Vec::Zero(20);
    u.head(8) = he.rank1_vector;
    H += u * u.transpose();
    const Vec d_ref = H.ldlt().solve(-g);
    CHECK((d - d_ref).norm() <= 1e-10 * (1.0 + d_ref.norm()));
    CHECK((H * d + g).norm() <= 1e-8 * (1.0 + g.norm()));
  }
}

TEST_CASE("bordered PB solve matches a dense oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  const ProblemData prob = oracle::random_feasible_qp(rng, 6, 9, 2);
  FactorContext ctx(prob);
  MeritEval me(6, 9);
  HessianElement he(6, 9);
  Vec x(6), s(9);
  for (int i = 0; i < 6; ++i) x[i] = gauss(rng);
  for (int i = 0; i < 9; ++i) s[i] = gauss(rng);
  const double sigma = 50.0;
  eval_merit(prob, x, s, -50.0, me);
  select_hessian(prob, me, s, -50.0, StageMode::PB, sigma, he);
  REQUIRE(he.rank1_active);
  REQUIRE(ctx.refactor(prob, he, 0.0));

  Vec g(15);
  for (int i = 0; i < 15; ++i) g[i] = gauss(rng);
  const double g_t = gauss(rng);
  Vec d(15);
  double d_t = 0.0;
  REQUIRE(ctx.solve_rank1_bordered(g, g_t, true, he.rank1_vector, sigma, d,
                                   d_t));

  Mat H = Mat::Zero(16, 16);
  H.topLeftCorner(15, 15) = assemble_dense(prob, he, 0.0);
  H(15, 15) = 1.0 / sigma;
  Vec w = Vec::Zero(16);
  w.head(6) = he.rank1_vector;
  w[15] = -1.0;
  H += w * w.transpose();
  Vec rhs(16);
  rhs.head(15) = -g;
  rhs[15] = -g_t;
  const Vec ref = H.ldlt().solve(rhs);
  CHECK((d - ref.head(15)).norm() <= 1e-9 * (1.0 + ref.norm()));
  CHECK(d_t == doctest::Approx(ref[15]).epsilon(1e-9));
}

TEST_CASE("empty column survives with regularization") {
  ProblemData prob;
  prob.Q = make_sparse(2, 2, {});
  prob.p = Vec::Zero(2);
  prob.A = make_sparse(1, 2, {Triplet(0, 0, 1.0)});  // column 1 empty
  prob.b = Vec::Zero(1);
  prob.cone.nonneg_dim = 1;
  FactorContext ctx(prob);
  HessianElement he(2, 1);
  he.base_pattern = HessPattern::WITHOUT_Q;
  he.H_diag_s[0] = 1.0;
  CHECK(ctx.refactor(prob, he, 1e-8));
}

TEST_CASE("pattern without Q is a subset of the pattern with Q") {
  std::mt19937_64 rng(29);
  const ProblemData prob = oracle::random_feasible_qp(rng, 6, 8, 2);
  FactorContext ctx(prob);
  const auto& with = ctx.pattern(HessPattern::WITH_Q);
  const auto& without = ctx.pattern(HessPattern::WITHOUT_Q);
  for (int j = 0; j < prob.n() + prob.m(); ++j) {
    std::vector<int> wi(with.Ai.begin() + with.Ap[j],
                        with.Ai.begin() + with.Ap[j + 1]);
    for (int k = without.Ap[j]; k < without.Ap[j + 1]; ++k)
      CHECK(std::find(wi.begin(), wi.end(), without.Ai[k]) != wi.end());
  }
}

TEST_CASE("golden factorization sizes on the MPC instance") {
  const ProblemData prob = build_mpc(MpcSpec{});
  FactorContext ctx(prob);
  CHECK(ctx.dim() == 420);
  // cross-checked against a scipy lower-triangle count of A^T A + diag on the
  // same instance; Q is diagonal so both variants share the fill pattern
  CHECK(ctx.pattern(HessPattern::WITH_Q).nnz() == 1296);
  CHECK(ctx.pattern(HessPattern::WITHOUT_Q).nnz() == 1296);
}

TEST_CASE("residual bound over random refactor/solve cycles") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    const ProblemData prob = oracle::random_feasible_qp(rng, 5, 8, 2);
    FactorContext ctx(prob);
    MeritEval me(5, 8);
    HessianElement he(5, 8);
    Vec x(5), s(8);
    for (int i = 0; i < 5; ++i) x[i] = gauss(rng);
    for (int i = 0; i < 8; ++i) s[i] = gauss(rng);
    const double t = gauss(rng);
    eval_merit(prob, x, s, t, me);
    select_hessian(prob, me, s, t, StageMode::PA, 0.0, he);
    REQUIRE(ctx.refactor(prob, he, 1e-8));
    Vec g(13), d(13);
    for (int i = 0; i < 13; ++i) g[i] = gauss(rng);
    REQUIRE(ctx.solve_rank1(g, he.rank1_active, he.rank1_vector, d));
    Mat H = assemble_dense(prob, he, 1e-8);
    if (he.rank1_active) {
      Vec u = Vec::Zero(13);
      u.head(5) = he.rank1_vector;
      H += u * u.transpose();
    }
    // random draws occasionally land near-singular; one factor/solve cycle
    // plus the rank-1 update then sits around 1e-7 relative
    CHECK((H * d + g).norm() <= 1e-6 * (1.0 + g.norm()));
  }
}
