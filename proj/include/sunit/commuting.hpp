#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/matrix.hpp"
#include "sunit/polynomial.hpp"

namespace sunit {

struct CompatibilityViolatedError : std::domain_error {
  explicit CompatibilityViolatedError(const std::string& what) : std::domain_error(what) {}
};

/// phi(M) = M*C - B*M, the Sylvester-style operator on d' x d matrices.
inline LocalMatrix sylvester_apply(const LocalMatrix& B, const LocalMatrix& C, const LocalMatrix& M) {
  return M * C - B * M;
}

enum class SylvesterPower { PlMinusOne, Pl };

/// Closed forms for phi^{p^l - 1} and phi^{p^l} over F_p(X~):
///   phi^{p^l - 1}(M) = sum_k B^k M C^{p^l - 1 - k},
///   phi^{p^l}(M)     = M C^{p^l} - B^{p^l} M.
inline LocalMatrix sylvester_power(const LocalMatrix& B, const LocalMatrix& C, const LocalMatrix& M,
                                   SylvesterPower kind, long ell) {
  if (B.ring().e != 1) throw std::invalid_argument("sylvester_power: matrices must be reductions mod p");
  if (B.rows() != M.rows() || C.rows() != M.cols())
    throw std::invalid_argument("sylvester_power: dimension mismatch");
  Int pl = int_pow(B.ring().p, Int(ell));
  if (kind == SylvesterPower::Pl) return M * C.pow(pl) - B.pow(pl) * M;
  LocalMatrix acc(M.ring(), M.rows(), M.cols());
  LocalMatrix Bk = LocalMatrix::identity(B.ring(), B.rows());
  // C^{p^l - 1 - k} computed by downward division-free recursion: keep powers explicit
  std::vector<LocalMatrix> Cpow;
  Cpow.push_back(LocalMatrix::identity(C.ring(), C.rows()));
  for (Int k = 1; k < pl; ++k) Cpow.push_back(Cpow.back() * C);
  for (Int k = 0; k < pl; ++k) {
    acc = acc + Bk * M * Cpow[static_cast<size_t>(pl - 1 - k)];
    Bk = Bk * B;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Linear-operator plumbing on the space of d' x d matrices over F_p(X~).

namespace detail {

inline FracVec flatten(const LocalMatrix& M) {
  FracVec v(M.rows() * M.cols(), LocalFrac::zero(M.ring()));
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) v[i * M.cols() + j] = M.at(i, j);
  return v;
}

inline LocalMatrix unflatten(const FracVec& v, const LocalRing& R, size_t rows, size_t cols) {
  LocalMatrix M(R, rows, cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) M.at(i, j) = v[i * cols + j];
  return M;
}

// Operator matrix of M -> M*C - B*M on the flattened matrix space.
inline LocalMatrix sylvester_operator_matrix(const LocalMatrix& B, const LocalMatrix& C) {
  const LocalRing& R = B.ring();
  size_t rows = B.rows(), cols = C.rows();
  size_t dim = rows * cols;
  LocalMatrix op(R, dim, dim);
  for (size_t u = 0; u < rows; ++u)
    for (size_t v = 0; v < cols; ++v) {
      LocalMatrix E(R, rows, cols);
      E.at(u, v) = LocalFrac::one(R);
      FracVec img = flatten(sylvester_apply(B, C, E));
      for (size_t k = 0; k < dim; ++k) op.at(k, u * cols + v) = img[k];
    }
  return op;
}

// Column-space basis of A (e = 1) as a list of column vectors.
inline std::vector<FracVec> column_space_basis(const LocalMatrix& A) {
  LocalMatrix copy = A;
  FieldSolveResult r = field_rref(copy);
  std::vector<FracVec> out;
  for (size_t c : r.pivot_cols) {
    FracVec v(A.rows(), LocalFrac::zero(A.ring()));
    for (size_t i = 0; i < A.rows(); ++i) v[i] = A.at(i, c);
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<FracVec> kernel_basis(const LocalMatrix& A) {
  LocalMatrix copy = A;
  FieldSolveResult r = field_rref(copy);
  std::vector<bool> is_pivot(A.cols(), false);
  for (size_t c : r.pivot_cols) is_pivot[c] = true;
  std::vector<FracVec> out;
  for (size_t c = 0; c < A.cols(); ++c) {
    if (is_pivot[c]) continue;
    FracVec v(A.cols(), LocalFrac::zero(A.ring()));
    v[c] = LocalFrac::one(A.ring());
    for (size_t r2 = 0; r2 < r.pivot_cols.size(); ++r2) v[r.pivot_cols[r2]] = -copy.at(r2, c);
    out.push_back(std::move(v));
  }
  return out;
}

struct Subspace {
  LocalMatrix basis;  // columns form the basis
  LocalMatrix restrict_op(const LocalMatrix& op) const {
    // coordinates of op*basis in the basis
    size_t k = basis.cols();
    LocalMatrix img = op * basis;
    LocalMatrix res(basis.ring(), k, k);
    // Solve basis * X = img column by column.
    for (size_t c = 0; c < k; ++c) {
      FracVec b(basis.rows(), LocalFrac::zero(basis.ring()));
      for (size_t i = 0; i < basis.rows(); ++i) b[i] = img.at(i, c);
      auto sol = field_solve(basis, b);
      if (!sol) throw std::logic_error("Subspace::restrict: not invariant");
      for (size_t i = 0; i < k; ++i) res.at(i, c) = (*sol)[i];
    }
    return res;
  }
};

}  // namespace detail

struct CommutingPhiSolution {
  LocalMatrix Q;
  long ell = 0;
};

/// Given pairwise-commuting operators phi_i(M) = M*C_i - B_i*M over F_p(X~)
/// and targets M_i with phi_i(M_j) = phi_j(M_i), finds Q and l with
/// phi_i^{p^l}(Q) = phi_i^{p^l - 1}(M_i) for every i.
inline CommutingPhiSolution solve_commuting_phi(const std::vector<LocalMatrix>& Bs,
                                                const std::vector<LocalMatrix>& Cs,
                                                const std::vector<LocalMatrix>& Ms) {
  if (Bs.size() != Cs.size() || Bs.size() != Ms.size() || Bs.empty())
    throw std::invalid_argument("solve_commuting_phi: bad input sizes");
  const LocalRing& R = Bs[0].ring();
  if (R.e != 1) throw std::invalid_argument("solve_commuting_phi: requires e = 1");
  size_t N = Bs.size();
  size_t rows = Ms[0].rows(), cols = Ms[0].cols();

  for (size_t i = 0; i < N; ++i)
    for (size_t j = i + 1; j < N; ++j) {
      if (Bs[i] * Bs[j] != Bs[j] * Bs[i] || Cs[i] * Cs[j] != Cs[j] * Cs[i])
        throw CompatibilityViolatedError("solve_commuting_phi: operators do not commute");
      LocalMatrix lhs = sylvester_apply(Bs[i], Cs[i], Ms[j]);
      LocalMatrix rhs = sylvester_apply(Bs[j], Cs[j], Ms[i]);
      if (lhs != rhs)
        throw CompatibilityViolatedError("solve_commuting_phi: phi_i(M_j) != phi_j(M_i)");
    }

  bool all_zero = true;
  for (const auto& M : Ms) all_zero &= M.is_zero();
  if (all_zero) return CommutingPhiSolution{LocalMatrix(R, rows, cols), 0};

  size_t dim = rows * cols;
  std::vector<LocalMatrix> ops;
  for (size_t i = 0; i < N; ++i) ops.push_back(detail::sylvester_operator_matrix(Bs[i], Cs[i]));

  // Fitting decomposition: refine subspaces until each operator restricts to a
  // nilpotent or invertible map on every component.
  std::vector<detail::Subspace> comps;
  comps.push_back({LocalMatrix::identity(R, dim)});
  for (size_t i = 0; i < N; ++i) {
    std::vector<detail::Subspace> next;
    for (auto& S : comps) {
      size_t k = S.basis.cols();
      LocalMatrix A = S.restrict_op(ops[i]);
      LocalMatrix Ak = A.pow(Int(k));
      auto ker = detail::kernel_basis(Ak);
      auto img = detail::column_space_basis(Ak);
      if (ker.empty() || img.empty()) {
        next.push_back(S);
        continue;
      }
      auto embed = [&](const std::vector<FracVec>& vecs) {
        LocalMatrix B(R, dim, vecs.size());
        for (size_t c = 0; c < vecs.size(); ++c) {
          // basis * vec gives the ambient vector
          for (size_t r2 = 0; r2 < dim; ++r2) {
            LocalFrac acc = LocalFrac::zero(R);
            for (size_t t = 0; t < k; ++t) acc = acc + S.basis.at(r2, t) * vecs[c][t];
            B.at(r2, c) = acc;
          }
        }
        return detail::Subspace{B};
      };
      next.push_back(embed(ker));
      next.push_back(embed(img));
    }
    comps = std::move(next);
  }

  // Per component: classify each operator, build the local part of Q.
  long max_nil = 0;
  FracVec Qflat(dim, LocalFrac::zero(R));
  std::vector<FracVec> Mflat;
  for (const auto& M : Ms) Mflat.push_back(detail::flatten(M));

  for (auto& S : comps) {
    size_t k = S.basis.cols();
    // coordinates of each target on this component: solve full-space split.
    // Build the full change of basis once per component set is costly; instead
    // we use the projection derived from the direct sum of all components.
    (void)k;
  }

  // Assemble the full change-of-basis (columns = all component bases).
  LocalMatrix P(R, dim, dim);
  std::vector<std::pair<size_t, size_t>> ranges;
  {
    size_t off = 0;
    for (auto& S : comps) {
      for (size_t c = 0; c < S.basis.cols(); ++c)
        for (size_t r2 = 0; r2 < dim; ++r2) P.at(r2, off + c) = S.basis.at(r2, c);
      ranges.emplace_back(off, S.basis.cols());
      off += S.basis.cols();
    }
    if (off != dim) throw std::logic_error("solve_commuting_phi: components do not span");
  }
  LocalMatrix Pinv = field_inverse(P);

  std::vector<FracVec> Mcoord;  // coordinates of targets in the component basis
  for (size_t i = 0; i < N; ++i) Mcoord.push_back(Pinv * Mflat[i]);

  FracVec Qcoord(dim, LocalFrac::zero(R));
  for (size_t ci = 0; ci < comps.size(); ++ci) {
    auto [off, k] = ranges[ci];
    // restrictions in component coordinates
    std::vector<LocalMatrix> rest;
    std::vector<bool> invertible(N, false);
    for (size_t i = 0; i < N; ++i) {
      LocalMatrix A = comps[ci].restrict_op(ops[i]);
      rest.push_back(A);
      invertible[i] = field_rank(A) == k;
      if (!invertible[i]) {
        // nilpotency index
        LocalMatrix power = LocalMatrix::identity(R, k);
        long nil = 0;
        while (!power.is_zero()) {
          power = power * A;
          ++nil;
          if (nil > static_cast<long>(k)) throw std::logic_error("solve_commuting_phi: Fitting split failed");
        }
        max_nil = std::max(max_nil, nil);
      }
    }
    FracVec vstar(k, LocalFrac::zero(R));
    bool have = false;
    for (size_t i = 0; i < N; ++i) {
      if (!invertible[i]) continue;
      FracVec vi(k, LocalFrac::zero(R));
      for (size_t t = 0; t < k; ++t) vi[t] = Mcoord[i][off + t];
      auto sol = field_solve(rest[i], vi);
      if (!sol) throw std::logic_error("solve_commuting_phi: invertible restriction failed to solve");
      if (!have) {
        vstar = *sol;
        have = true;
      } else {
        for (size_t t = 0; t < k; ++t)
          if (vstar[t] != (*sol)[t])
            throw CompatibilityViolatedError("solve_commuting_phi: targets disagree across operators");
      }
    }
    for (size_t t = 0; t < k; ++t) Qcoord[off + t] = vstar[t];
  }

  FracVec Qfull = P * Qcoord;
  CommutingPhiSolution out{detail::unflatten(Qfull, R, rows, cols), 0};

  // smallest l with p^l >= 1 + max nilpotency index
  Int pl = 1;
  while (pl < 1 + Int(max_nil)) {
    pl *= R.p;
    ++out.ell;
  }

  // Postcondition, checked exactly on every call.
  for (size_t i = 0; i < N; ++i) {
    LocalMatrix lhs = sylvester_power(Bs[i], Cs[i], out.Q, SylvesterPower::Pl, out.ell);
    LocalMatrix rhs = sylvester_power(Bs[i], Cs[i], Ms[i], SylvesterPower::PlMinusOne, out.ell);
    if (lhs != rhs) throw std::logic_error("solve_commuting_phi: postcondition failed");
  }
  return out;
}

/// Orthogonal idempotent decomposition of the commutative algebra generated by
/// commuting matrices over F_p(X~), within the supported factorization budget.
inline std::vector<LocalMatrix> algebra_split_local(const std::vector<LocalMatrix>& generators) {
  if (generators.empty()) throw std::invalid_argument("algebra_split_local: no generators");
  const LocalRing& R = generators[0].ring();
  size_t d = generators[0].rows();
  for (size_t i = 0; i < generators.size(); ++i)
    for (size_t j = i + 1; j < generators.size(); ++j)
      if (generators[i] * generators[j] != generators[j] * generators[i])
        throw std::invalid_argument("algebra_split_local: generators do not commute");

  std::vector<LocalMatrix> idem = {LocalMatrix::identity(R, d)};

  // Elements used to refine: generators, then sums and products of pairs.
  std::vector<LocalMatrix> refiners = generators;
  for (size_t i = 0; i < generators.size(); ++i)
    for (size_t j = i + 1; j < generators.size(); ++j) {
      refiners.push_back(generators[i] + generators[j]);
      refiners.push_back(generators[i] * generators[j]);
    }

  bool changed = true;
  int rounds = 0;
  while (changed && rounds++ < 8) {
    changed = false;
    for (const auto& g : refiners) {
      std::vector<LocalMatrix> next;
      for (const auto& eps : idem) {
        // restriction of eps*g to the image of eps
        auto img = detail::column_space_basis(eps);
        if (img.empty()) continue;
        size_t k = img.size();
        LocalMatrix basis(R, d, k);
        for (size_t c = 0; c < k; ++c)
          for (size_t r2 = 0; r2 < d; ++r2) basis.at(r2, c) = img[c][r2];
        detail::Subspace S{basis};
        LocalMatrix A = S.restrict_op(eps * g);
        UPoly mu = minimal_polynomial(A);
        std::vector<UPoly> parts = coprime_primary_factors(mu);
        if (parts.size() <= 1) {
          next.push_back(eps);
          continue;
        }
        changed = true;
        UPoly muFull = UPoly::one(R);
        for (const auto& q : parts) muFull = muFull * q;
        LocalMatrix sum(R, d, d);
        for (const auto& q : parts) {
          UPoly cofactor = muFull.divmod(q).first;
          UPoly s, t;
          UPoly gcd = upoly_xgcd(cofactor, q, s, t);
          if (gcd.degree() != 0) throw std::logic_error("algebra_split_local: parts not coprime");
          LocalMatrix ei = (s * cofactor).eval_at(eps * g) * eps;
          if (ei * ei != ei) throw std::logic_error("algebra_split_local: idempotent check failed");
          sum = sum + ei;
          if (!ei.is_zero()) next.push_back(ei);
        }
        if (sum != eps) throw std::logic_error("algebra_split_local: idempotents do not sum to unit");
      }
      idem = std::move(next);
    }
  }
  // Final sanity: sum to identity, pairwise orthogonal.
  LocalMatrix sum(R, d, d);
  for (const auto& e1 : idem) sum = sum + e1;
  if (sum != LocalMatrix::identity(R, d))
    throw std::logic_error("algebra_split_local: decomposition incomplete");
  for (size_t i = 0; i < idem.size(); ++i)
    for (size_t j = i + 1; j < idem.size(); ++j)
      if (!(idem[i] * idem[j]).is_zero()) throw std::logic_error("algebra_split_local: not orthogonal");
  return idem;
}

}  // namespace sunit
