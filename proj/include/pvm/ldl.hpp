#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pvm {

// Simplicial up-looking LDL' factorization of a sparse symmetric matrix given
// by its upper triangle in CSC form (natural ordering, no pivoting). The
// symbolic phase computes the elimination tree and column counts; the numeric
// phase and the triangular solves work entirely in preallocated storage.
struct LdlFactor {
  int n = 0;
  // symbolic
  std::vector<int> parent;   // elimination tree
  std::vector<int> Lp;       // column pointers of L (strictly lower part)
  std::vector<std::int64_t> flag;  // visit stamps, unique per processed column
  std::int64_t stamp = 0;
  // numeric
  std::vector<int> Li;
  std::vector<double> Lx;
  std::vector<double> D;
  std::vector<int> Lnz;      // entries filled per column during numeric phase
  std::vector<int> pattern;  // row-pattern stack
  std::vector<double> y;     // dense accumulator

  // Symbolic analysis for a fixed upper-triangular pattern (Ap, Ai).
  void analyze(int dim, const int* Ap, const int* Ai) {
    n = dim;
    parent.assign(n, -1);
    flag.assign(n, -1);
    stamp = 0;
    Lnz.assign(n, 0);
    Lp.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) {
      const std::int64_t mark = ++stamp;
      parent[j] = -1;
      flag[j] = mark;
      for (int p = Ap[j]; p < Ap[j + 1]; ++p) {
        int i = Ai[p];
        while (flag[i] != mark) {  // walk up the etree toward the root
          if (parent[i] == -1) parent[i] = j;
          Lnz[i]++;
          flag[i] = mark;
          i = parent[i];
        }
      }
    }
    for (int j = 0; j < n; ++j) Lp[j + 1] = Lp[j] + Lnz[j];
    Li.assign(Lp[n], 0);
    Lx.assign(Lp[n], 0.0);
    D.assign(n, 0.0);
    y.assign(n, 0.0);
    pattern.assign(n, 0);
  }

  int nnz_lower() const { return Lp.empty() ? 0 : Lp[n]; }

  // Numeric factorization of the same pattern analyzed above. Values Axv are
  // parallel to (Ap, Ai). Returns false on pivot breakdown (|d| < pivot_tol).
  bool factorize(const int* Ap, const int* Ai, const double* Axv,
                 double pivot_tol = 1e-14) {
    for (int j = 0; j < n; ++j) {
      // scatter column j of A and collect the nonzero pattern of row j of L
      const std::int64_t mark = ++stamp;
      int top = n;
      y[j] = 0.0;
      flag[j] = mark;
      Lnz[j] = 0;
      for (int p = Ap[j]; p < Ap[j + 1]; ++p) {
        int i = Ai[p];
        y[i] += Axv[p];
        int len = 0;
        while (flag[i] != mark) {
          pattern[len++] = i;
          flag[i] = mark;
          i = parent[i];
        }
        while (len > 0) pattern[--top] = pattern[--len];
      }
      double dj = y[j];
      y[j] = 0.0;
      for (int k = top; k < n; ++k) {
        const int i = pattern[k];
        const double yi = y[i];
        y[i] = 0.0;
        const int p2 = Lp[i] + Lnz[i];
        for (int p = Lp[i]; p < p2; ++p) y[Li[p]] -= Lx[p] * yi;
        const double lji = yi / D[i];
        dj -= lji * yi;
        Li[p2] = j;
        Lx[p2] = lji;
        Lnz[i]++;
      }
      if (std::abs(dj) < pivot_tol) return false;
      D[j] = dj;
    }
    return true;
  }

  // In-place solve of (L D L') z = z.
  void solve(double* z) const {
    for (int j = 0; j < n; ++j) {
      const double zj = z[j];
      for (int p = Lp[j]; p < Lp[j] + Lnz[j]; ++p) z[Li[p]] -= Lx[p] * zj;
    }
    for (int j = 0; j < n; ++j) z[j] /= D[j];
    for (int j = n - 1; j >= 0; --j) {
      double zj = z[j];
      for (int p = Lp[j]; p < Lp[j] + Lnz[j]; ++p) zj -= Lx[p] * z[Li[p]];
      z[j] = zj;
    }
  }
};

}  // namespace pvm
