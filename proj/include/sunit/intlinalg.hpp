#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sunit/numeric.hpp"

namespace sunit {

using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>;  // row-major
using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

inline IntMat int_identity(size_t n) {
  IntMat I(n, IntVec(n, 0));
  for (size_t i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

inline IntVec int_mat_vec(const IntMat& A, const IntVec& x) {
  IntVec y(A.size(), 0);
  for (size_t i = 0; i < A.size(); ++i)
    for (size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
  return y;
}

inline IntMat int_mat_mul(const IntMat& A, const IntMat& B) {
  size_t n = A.size(), m = B.empty() ? 0 : B[0].size(), k = B.size();
  IntMat C(n, IntVec(m, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l)
      if (A[i][l] != 0)
        for (size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
  return C;
}

struct SmithResult {
  IntMat U, D, V;  // U*A*V = D, U and V unimodular, D diagonal with divisibility chain
};

/// Smith normal form over Z.
inline SmithResult smith_normal_form(IntMat A) {
  size_t n = A.size(), m = n ? A[0].size() : 0;
  SmithResult res{int_identity(n), A, int_identity(m)};
  IntMat& D = res.D;
  auto row_swap = [&](size_t i, size_t j) {
    std::swap(D[i], D[j]);
    std::swap(res.U[i], res.U[j]);
  };
  auto col_swap = [&](size_t i, size_t j) {
    for (auto& r : D) std::swap(r[i], r[j]);
    for (auto& r : res.V) std::swap(r[i], r[j]);
  };
  auto row_add = [&](size_t dst, size_t src, const Int& c) {
    for (size_t j = 0; j < m; ++j) D[dst][j] += c * D[src][j];
    for (size_t j = 0; j < n; ++j) res.U[dst][j] += c * res.U[src][j];
  };
  auto col_add = [&](size_t dst, size_t src, const Int& c) {
    for (size_t i = 0; i < n; ++i) D[i][dst] += c * D[i][src];
    for (size_t i = 0; i < m; ++i) res.V[i][dst] += c * res.V[i][src];
  };
  auto row_neg = [&](size_t i) {
    for (auto& x : D[i]) x = -x;
    for (auto& x : res.U[i]) x = -x;
  };

  size_t t = 0;
  while (t < n && t < m) {
    // find a nonzero pivot with minimal absolute value
    size_t pi = t, pj = t;
    Int best = 0;
    for (size_t i = t; i < n; ++i)
      for (size_t j = t; j < m; ++j) {
        Int a = D[i][j] < 0 ? Int(-D[i][j]) : D[i][j];
        if (a != 0 && (best == 0 || a < best)) {
          best = a;
          pi = i;
          pj = j;
        }
      }
    if (best == 0) break;
    row_swap(t, pi);
    col_swap(t, pj);
    if (D[t][t] < 0) row_neg(t);
    bool clean = true;
    for (size_t i = t + 1; i < n; ++i) {
      if (D[i][t] != 0) {
        Int q = D[i][t] / D[t][t];
        row_add(i, t, -q);
        if (D[i][t] != 0) clean = false;
      }
    }
    for (size_t j = t + 1; j < m; ++j) {
      if (D[t][j] != 0) {
        Int q = D[t][j] / D[t][t];
        col_add(j, t, -q);
        if (D[t][j] != 0) clean = false;
      }
    }
    if (!clean) continue;  // remainders left; pick a new smaller pivot
    // divisibility sweep: D[t][t] must divide the rest
    bool divides = true;
    for (size_t i = t + 1; i < n && divides; ++i)
      for (size_t j = t + 1; j < m && divides; ++j)
        if (D[i][j] % D[t][t] != 0) {
          row_add(t, i, 1);
          divides = false;
        }
    if (!divides) continue;
    ++t;
  }
  return res;
}

/// Solves A x = b over Z; empty if no integer solution exists.
inline std::optional<IntVec> solve_integer(const IntMat& A, const IntVec& b) {
  size_t n = A.size(), m = n ? A[0].size() : 0;
  if (b.size() != n) throw std::invalid_argument("solve_integer: size mismatch");
  SmithResult s = smith_normal_form(A);
  IntVec c = int_mat_vec(s.U, b);
  IntVec y(m, 0);
  for (size_t i = 0; i < std::min(n, m); ++i) {
    if (s.D[i][i] != 0) {
      if (c[i] % s.D[i][i] != 0) return std::nullopt;
      y[i] = c[i] / s.D[i][i];
    }
  }
  for (size_t i = 0; i < n; ++i) {
    Int acc = 0;
    for (size_t j = 0; j < std::min(n, m); ++j) acc += s.D[i][j] * y[j];
    if (acc != c[i]) return std::nullopt;
  }
  return int_mat_vec(s.V, y);
}

/// Basis (as columns stored rows-of-matrix style) of {x : A x = 0} over Z.
inline std::vector<IntVec> integer_kernel(const IntMat& A) {
  size_t n = A.size(), m = n ? A[0].size() : 0;
  SmithResult s = smith_normal_form(A);
  std::vector<IntVec> out;
  for (size_t j = 0; j < m; ++j) {
    bool zero_col = j >= n || s.D[std::min(j, n - 1)].size() == 0;
    Int dj = (j < std::min(n, m)) ? s.D[j][j] : Int(0);
    if (j >= n || dj == 0) {
      IntVec v(m);
      for (size_t i = 0; i < m; ++i) v[i] = s.V[i][j];
      out.push_back(std::move(v));
    }
    (void)zero_col;
  }
  return out;
}

// Rational Gaussian elimination: returns rank; optionally records a reduced
// row-echelon copy and pivot columns.
inline size_t rat_rref(RatMat& A, std::vector<size_t>* pivots = nullptr) {
  size_t n = A.size(), m = n ? A[0].size() : 0;
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = r;
    while (piv < n && A[piv][c] == 0) ++piv;
    if (piv == n) continue;
    std::swap(A[r], A[piv]);
    Rat inv = Rat(1) / A[r][c];
    for (size_t j = 0; j < m; ++j) A[r][j] *= inv;
    for (size_t i = 0; i < n; ++i) {
      if (i != r && A[i][c] != 0) {
        Rat f = A[i][c];
        for (size_t j = 0; j < m; ++j) A[i][j] -= f * A[r][j];
      }
    }
    if (pivots) pivots->push_back(c);
    ++r;
  }
  return r;
}

inline size_t rat_rank(RatMat A) { return rat_rref(A); }

/// Solves A x = b over Q; empty if inconsistent.
inline std::optional<RatVec> solve_rational(const RatMat& A, const RatVec& b) {
  size_t n = A.size(), m = n ? A[0].size() : 0;
  RatMat aug(n, RatVec(m + 1));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) aug[i][j] = A[i][j];
    aug[i][m] = b[i];
  }
  std::vector<size_t> pivots;
  rat_rref(aug, &pivots);
  RatVec x(m, 0);
  for (size_t r = 0; r < pivots.size(); ++r) {
    if (pivots[r] == m) return std::nullopt;  // pivot in the rhs column
    x[pivots[r]] = aug[r][m];
  }
  // verify (handles the free-variable zero choice)
  for (size_t i = 0; i < n; ++i) {
    Rat acc = 0;
    for (size_t j = 0; j < m; ++j) acc += A[i][j] * x[j];
    if (acc != b[i]) return std::nullopt;
  }
  return x;
}

/// Greedily extends `base` (assumed Q-independent) by vectors from `pool`
/// keeping Q-independence; returns indices of chosen pool vectors.
inline std::vector<size_t> extend_independent(const std::vector<RatVec>& base, const std::vector<RatVec>& pool) {
  std::vector<RatVec> cur = base;
  std::vector<size_t> chosen;
  size_t dim = base.empty() ? (pool.empty() ? 0 : pool[0].size()) : base[0].size();
  size_t rank = [&] {
    if (cur.empty()) return size_t(0);
    RatMat M(cur.size(), RatVec(dim));
    for (size_t i = 0; i < cur.size(); ++i) M[i] = cur[i];
    return rat_rank(M);
  }();
  for (size_t k = 0; k < pool.size(); ++k) {
    RatMat M(cur.size() + 1, RatVec(dim));
    for (size_t i = 0; i < cur.size(); ++i) M[i] = cur[i];
    M[cur.size()] = pool[k];
    if (rat_rank(M) > rank) {
      cur.push_back(pool[k]);
      chosen.push_back(k);
      ++rank;
    }
  }
  return chosen;
}

/// Generators of L1 ∩ L2, lattices given by integer generator lists.
inline std::vector<IntVec> lattice_intersection(const std::vector<IntVec>& g1, const std::vector<IntVec>& g2) {
  if (g1.empty() || g2.empty()) return {};
  size_t d = g1[0].size();
  size_t m1 = g1.size(), m2 = g2.size();
  IntMat A(d, IntVec(m1 + m2, 0));
  for (size_t j = 0; j < m1; ++j)
    for (size_t i = 0; i < d; ++i) A[i][j] = g1[j][i];
  for (size_t j = 0; j < m2; ++j)
    for (size_t i = 0; i < d; ++i) A[i][m1 + j] = -g2[j][i];
  std::vector<IntVec> ker = integer_kernel(A);
  std::vector<IntVec> out;
  for (const auto& k : ker) {
    IntVec v(d, 0);
    for (size_t j = 0; j < m1; ++j)
      for (size_t i = 0; i < d; ++i) v[i] += k[j] * g1[j][i];
    bool nonzero = false;
    for (const auto& x : v) nonzero |= (x != 0);
    if (nonzero) out.push_back(std::move(v));
  }
  return out;
}

/// Membership of x in the lattice generated by gens.
inline bool lattice_member(const std::vector<IntVec>& gens, const IntVec& x) {
  size_t d = x.size();
  if (gens.empty()) {
    for (const auto& c : x)
      if (c != 0) return false;
    return true;
  }
  IntMat A(d, IntVec(gens.size()));
  for (size_t j = 0; j < gens.size(); ++j)
    for (size_t i = 0; i < d; ++i) A[i][j] = gens[j][i];
  return solve_integer(A, x).has_value();
}

/// Representatives of the finite quotient L/M, where M ⊆ L are lattices given
/// by generators (the quotient must be finite, i.e. rank M = rank L).
inline std::vector<IntVec> quotient_representatives(const std::vector<IntVec>& L, const std::vector<IntVec>& M) {
  if (L.empty()) return {IntVec{}};
  size_t d = L[0].size();
  // Reduce L to an independent basis.
  std::vector<RatVec> pool;
  for (const auto& g : L) pool.emplace_back(g.begin(), g.end());
  std::vector<size_t> keep = extend_independent({}, pool);
  std::vector<IntVec> B;  // basis-ish generating set; make it a true basis via HNF on coordinates
  for (size_t k : keep) B.push_back(L[k]);
  // Express the chosen independent set may not generate all of L; build a true
  // basis via SNF of the coordinate matrix of all L-generators over B... we
  // instead take the standard route: SNF of the matrix with columns = all
  // generators of L gives a basis of L.
  {
    IntMat A(d, IntVec(L.size(), 0));
    for (size_t j = 0; j < L.size(); ++j)
      for (size_t i = 0; i < d; ++i) A[i][j] = L[j][i];
    SmithResult s = smith_normal_form(A);
    // columns of U^{-1} scaled by D give a basis: A = U^{-1} D V^{-1}; lattice
    // spanned by columns of A equals lattice spanned by columns of U^{-1} D.
    // Compute U^{-1} by solving U X = I over Z (U unimodular).
    size_t n = d;
    IntMat Uinv(n, IntVec(n, 0));
    for (size_t c = 0; c < n; ++c) {
      IntVec e(n, 0);
      e[c] = 1;
      auto col = solve_integer(s.U, e);
      if (!col) throw std::logic_error("quotient_representatives: U not invertible");
      for (size_t i = 0; i < n; ++i) Uinv[i][c] = (*col)[i];
    }
    B.clear();
    for (size_t j = 0; j < std::min(d, L.size()); ++j) {
      if (s.D[j][j] == 0) continue;
      IntVec v(d, 0);
      for (size_t i = 0; i < d; ++i) v[i] = Uinv[i][j] * s.D[j][j];
      B.push_back(std::move(v));
    }
  }
  size_t r = B.size();
  // Coordinates of M's generators in the basis B.
  IntMat Bmat(d, IntVec(r, 0));
  for (size_t j = 0; j < r; ++j)
    for (size_t i = 0; i < d; ++i) Bmat[i][j] = B[j][i];
  IntMat C(r, IntVec(M.size(), 0));
  for (size_t j = 0; j < M.size(); ++j) {
    auto sol = solve_integer(Bmat, M[j]);
    if (!sol) throw std::invalid_argument("quotient_representatives: M not inside L");
    for (size_t i = 0; i < r; ++i) C[i][j] = (*sol)[i];
  }
  SmithResult s = smith_normal_form(C);
  // Quotient ≅ ⊕ Z/D_ii in coordinates y = U * (B-coords). Enumerate boxes.
  std::vector<Int> diag;
  for (size_t i = 0; i < r; ++i) {
    Int di = (i < std::min(C.size(), C[0].size())) ? s.D[i][i] : Int(0);
    if (di == 0) throw std::invalid_argument("quotient_representatives: quotient not finite");
    diag.push_back(di < 0 ? Int(-di) : di);
  }
  // U^{-1} in the r-dim coordinate space
  IntMat Uinv(r, IntVec(r, 0));
  for (size_t c = 0; c < r; ++c) {
    IntVec e(r, 0);
    e[c] = 1;
    auto col = solve_integer(s.U, e);
    if (!col) throw std::logic_error("quotient_representatives: U not invertible");
    for (size_t i = 0; i < r; ++i) Uinv[i][c] = (*col)[i];
  }
  std::vector<IntVec> reps;
  IntVec idx(r, 0);
  while (true) {
    // rep = B * (Uinv * idx)
    IntVec y = int_mat_vec(Uinv, idx);
    IntVec v(d, 0);
    for (size_t j = 0; j < r; ++j)
      for (size_t i = 0; i < d; ++i) v[i] += y[j] * B[j][i];
    reps.push_back(std::move(v));
    size_t k = 0;
    while (k < r) {
      idx[k] += 1;
      if (idx[k] < diag[k]) break;
      idx[k] = 0;
      ++k;
    }
    if (k == r) break;
  }
  return reps;
}

}  // namespace sunit
