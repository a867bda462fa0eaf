#pragma once

#include <stdexcept>
#include <vector>

#include "sunit/commuting.hpp"
#include "sunit/matrix.hpp"

namespace sunit {

// ---------------------------------------------------------------------------
// The splitting operator Phi along X_i -> X_i^p. Components are indexed by
// residue tuples (r_1..r_n) in {0..p-1}^n, ordered lexicographically with r_1
// most significant.

namespace phi_detail {

inline long long residue_count(const LocalRing& R) {
  Int c = int_pow(R.p, Int(R.nvars));
  return static_cast<long long>(c);
}

inline long long residue_index(const LocalRing& R, const std::vector<long long>& r) {
  long long idx = 0;
  long long p = static_cast<long long>(R.p);
  for (long i = 0; i < R.nvars; ++i) idx = idx * p + r[i];
  return idx;
}

inline std::vector<long long> residue_tuple(const LocalRing& R, long long idx) {
  long long p = static_cast<long long>(R.p);
  std::vector<long long> r(R.nvars, 0);
  for (long i = R.nvars - 1; i >= 0; --i) {
    r[i] = idx % p;
    idx /= p;
  }
  return r;
}

inline std::vector<std::vector<long long>> all_tuples(long nvars, long long bound) {
  std::vector<std::vector<long long>> out;
  std::vector<long long> r(nvars, 0);
  while (true) {
    out.push_back(r);
    long i = nvars - 1;
    for (; i >= 0; --i) {
      if (++r[i] < bound) break;
      r[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

// Digit split of a polynomial: g = sum_r G_r(X^p) * X^r.
inline std::vector<LaurentPoly> poly_digit_split(const LaurentPoly& g, const LocalRing& R) {
  long long count = residue_count(R);
  std::vector<LaurentPoly> out(count, LaurentPoly(R.nvars, g.modulus()));
  long long p = static_cast<long long>(R.p);
  for (const auto& [e, c] : g.terms()) {
    std::vector<long long> r(R.nvars), q(R.nvars);
    for (long i = 0; i < R.nvars; ++i) {
      long long ri = ((e[i] % p) + p) % p;
      r[i] = ri;
      q[i] = (e[i] - ri) / p;
    }
    out[residue_index(R, r)].add_term(ExpVec(q.begin(), q.end()), c);
  }
  return out;
}

}  // namespace phi_detail

/// Components of f under Z/p^e(X~) = ⊕_r Z/p^e(X~^p) X~^r; the denominator is
/// handled through h^{p^e} = h^{p^{e-1}}(X~^p).
inline FracVec phi_split(const LocalFrac& f) {
  const LocalRing& R = f.ring();
  LaurentPoly H = f.den().pow(int_pow(R.p, Int(R.e - 1)));  // h^{p^{e-1}}; h^{p^e} = H(X^p)
  LaurentPoly G = f.num() * f.den().pow(int_pow(R.p, Int(R.e)) - 1);
  auto parts = phi_detail::poly_digit_split(G, R);
  FracVec out;
  out.reserve(parts.size());
  for (auto& g : parts) out.emplace_back(R, std::move(g), H);
  return out;
}

/// Reassembly sum_r f_r(X^p) X^r; inverse of phi_split.
inline LocalFrac phi_reassemble(const FracVec& parts, const LocalRing& R) {
  LocalFrac acc = LocalFrac::zero(R);
  for (long long j = 0; j < static_cast<long long>(parts.size()); ++j) {
    auto r = phi_detail::residue_tuple(R, j);
    LaurentPoly mono = LaurentPoly::monomial(R.nvars, ExpVec(r.begin(), r.end()), 1, R.modulus());
    LocalFrac sub(R, parts[j].num().frobenius_substitute(R.p, 1),
                  parts[j].den().frobenius_substitute(R.p, 1));
    acc = acc + sub * LocalFrac::of_poly(R, mono);
  }
  return acc;
}

/// Phi on vectors: residue-major layout, out[j*d + i] = phi_split(v[i])[j],
/// matching the projections pi_j picking d consecutive entries.
inline FracVec phi_vector(const FracVec& v, const LocalRing& R) {
  long long pn = phi_detail::residue_count(R);
  size_t d = v.size();
  FracVec out(pn * d, LocalFrac::zero(R));
  for (size_t i = 0; i < d; ++i) {
    FracVec parts = phi_split(v[i]);
    for (long long j = 0; j < pn; ++j) out[j * d + i] = parts[j];
  }
  return out;
}

inline FracVec phi_vector_iter(FracVec v, const LocalRing& R, int k) {
  for (int i = 0; i < k; ++i) v = phi_vector(v, R);
  return v;
}

/// pi_j: block j of size d.
inline FracVec pi_component(const FracVec& w, size_t d, long long j) {
  FracVec out(d, w.empty() ? LocalFrac() : w[0]);
  for (size_t i = 0; i < d; ++i) out[i] = w[j * d + i];
  return out;
}

/// The induced matrix with Phi(A) Phi(v) = Phi(A v).
inline LocalMatrix phi_matrix(const LocalMatrix& A) {
  const LocalRing& R = A.ring();
  long long pn = phi_detail::residue_count(R);
  long long p = static_cast<long long>(R.p);
  size_t a = A.rows(), b = A.cols();
  LocalMatrix out(R, pn * a, pn * b);
  for (size_t i = 0; i < a; ++i) {
    for (size_t k = 0; k < b; ++k) {
      if (A.at(i, k).is_zero()) continue;
      FracVec parts = phi_split(A.at(i, k));
      for (long long u = 0; u < pn; ++u) {
        auto ut = phi_detail::residue_tuple(R, u);
        for (long long s = 0; s < pn; ++s) {
          auto st = phi_detail::residue_tuple(R, s);
          std::vector<long long> r(R.nvars), q(R.nvars);
          for (long v = 0; v < R.nvars; ++v) {
            long long rv = ((ut[v] - st[v]) % p + p) % p;
            r[v] = rv;
            q[v] = (rv + st[v] - ut[v]) / p;
          }
          const LocalFrac& comp = parts[phi_detail::residue_index(R, r)];
          if (comp.is_zero()) continue;
          LaurentPoly mono = LaurentPoly::monomial(R.nvars, ExpVec(q.begin(), q.end()), 1, R.modulus());
          out.at(u * a + i, s * b + k) =
              out.at(u * a + i, s * b + k) + comp * LocalFrac::of_poly(R, mono);
        }
      }
    }
  }
  return out;
}

inline LocalMatrix phi_matrix_iter(LocalMatrix A, int k) {
  for (int i = 0; i < k; ++i) A = phi_matrix(A);
  return A;
}

/// Permutation P with Phi(diag_b(M)) = P diag_b(Phi(M)) P^{-1} for b blocks of
/// size m: column (beta*p^n*m + j*m + i) maps to row (j*b*m + beta*m + i).
inline LocalMatrix phi_block_permutation(const LocalRing& R, size_t blocks, size_t m) {
  long long pn = phi_detail::residue_count(R);
  size_t dim = blocks * pn * m;
  LocalMatrix P(R, dim, dim);
  for (size_t beta = 0; beta < blocks; ++beta)
    for (long long j = 0; j < pn; ++j)
      for (size_t i = 0; i < m; ++i)
        P.at(j * blocks * m + beta * m + i, beta * pn * m + j * m + i) = LocalFrac::one(R);
  return P;
}

inline LocalMatrix block_diag(const LocalMatrix& M, size_t blocks) {
  LocalMatrix out(M.ring(), M.rows() * blocks, M.cols() * blocks);
  for (size_t b = 0; b < blocks; ++b)
    for (size_t i = 0; i < M.rows(); ++i)
      for (size_t j = 0; j < M.cols(); ++j) out.at(b * M.rows() + i, b * M.cols() + j) = M.at(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Frobenius splitting of F_p(X~)-algebras (the field-level stage).

namespace phi_detail {

// Coordinates of a vector over the subfield F_p(X~^{p^s}): the s-fold Phi
// expansion; independence over the subfield is ordinary independence of these.
inline FracVec subfield_coords(const FracVec& v, const LocalRing& R, int s) {
  return phi_vector_iter(v, R, s);
}

inline FracVec flatten_matrix(const LocalMatrix& M) {
  FracVec v(M.rows() * M.cols(), LocalFrac::zero(M.ring()));
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) v[i * M.cols() + j] = M.at(i, j);
  return v;
}

struct SpanTracker {
  LocalRing R;
  std::vector<FracVec> vecs;
  bool contains(const FracVec& v) const {
    if (vecs.empty()) {
      for (const auto& x : v)
        if (!x.is_zero()) return false;
      return true;
    }
    LocalMatrix A(R, vecs[0].size(), vecs.size());
    for (size_t c = 0; c < vecs.size(); ++c)
      for (size_t r = 0; r < vecs[c].size(); ++r) A.at(r, c) = vecs[c][r];
    return field_solve(A, v).has_value();
  }
  bool add_if_new(const FracVec& v) {
    if (contains(v)) return false;
    vecs.push_back(v);
    return true;
  }
};

// Module basis over F_p(X~) of the unital algebra generated by commuting mats.
inline std::vector<LocalMatrix> algebra_basis(const std::vector<LocalMatrix>& gens, const LocalRing& R) {
  size_t d = gens[0].rows();
  std::vector<LocalMatrix> basis = {LocalMatrix::identity(R, d)};
  SpanTracker span{R, {flatten_matrix(basis[0])}};
  size_t head = 0;
  while (head < basis.size()) {
    LocalMatrix cur = basis[head++];
    for (const auto& g : gens) {
      LocalMatrix prod = cur * g;
      if (span.add_if_new(flatten_matrix(prod))) basis.push_back(prod);
    }
  }
  return basis;
}

}  // namespace phi_detail

struct FrobeniusSplit {
  int s = 0;
  LocalMatrix R;  // over the coefficient ring of the inputs
};

/// Frobenius splitting of the local algebra generated by commuting invertible
/// matrices over F_p(X~): returns (s, R) with
///   R^{-1} Phi^{s+1}(B_i)^{p^{s+1}} R = diag_{p^n}(Phi^s(B_i)^{p^s}).
/// The radical index of the generated algebra must be at most t.
inline FrobeniusSplit field_frobenius_split(const std::vector<LocalMatrix>& Bs, int t) {
  if (Bs.empty()) throw std::invalid_argument("field_frobenius_split: empty input");
  const LocalRing& R = Bs[0].ring();
  if (R.e != 1) throw std::invalid_argument("field_frobenius_split: requires e = 1");
  size_t d = Bs[0].rows();
  long long pn = phi_detail::residue_count(R);

  int s = 0;
  while (int_pow(R.p, Int(s)) < t) ++s;
  Int ps = int_pow(R.p, Int(s));

  // Basis E_k of B^{p^s} over F_p(X~^{p^s}), drawn from p^s-th powers of an
  // algebra module basis.
  std::vector<LocalMatrix> bbasis = phi_detail::algebra_basis(Bs, R);
  std::vector<LocalMatrix> E;
  phi_detail::SpanTracker espan{R, {}};
  for (const auto& m : bbasis) {
    LocalMatrix cand = m.pow(ps);
    FracVec coords = phi_detail::subfield_coords(phi_detail::flatten_matrix(cand), R, s);
    if (espan.add_if_new(coords)) E.push_back(cand);
  }
  size_t dB = E.size();

  // Basis v_j of V/pV over the field B^{p^s}; candidates X^r e_i.
  std::vector<FracVec> Vbasis;
  phi_detail::SpanTracker vspan{R, {}};
  long long ps_ll = static_cast<long long>(ps);
  std::vector<std::vector<long long>> rtuples = phi_detail::all_tuples(R.nvars, ps_ll);
  for (const auto& r : rtuples) {
    for (size_t i = 0; i < d; ++i) {
      FracVec cand(d, LocalFrac::zero(R));
      cand[i] = LocalFrac::of_poly(R, LaurentPoly::monomial(R.nvars, ExpVec(r.begin(), r.end()), 1, R.modulus()));
      FracVec coords = phi_detail::subfield_coords(cand, R, s);
      if (vspan.contains(coords)) continue;
      // adopt cand; the span gains all E_k * cand
      Vbasis.push_back(cand);
      for (const auto& Ek : E) {
        FracVec w = Ek * cand;
        vspan.add_if_new(phi_detail::subfield_coords(w, R, s));
      }
    }
  }
  size_t dV = Vbasis.size();
  size_t expanded = static_cast<size_t>(int_pow(Int(pn), Int(s)).convert_to<long long>()) * d;
  if (dV * dB != expanded)
    throw std::logic_error("field_frobenius_split: basis count mismatch (algebra not local?)");

  // C = (Phi^s(E_k v_j)) column-ordered j-major.
  LocalMatrix C(R, expanded, expanded);
  for (size_t j = 0; j < dV; ++j)
    for (size_t k = 0; k < dB; ++k) {
      FracVec col = phi_vector_iter(E[k] * Vbasis[j], R, s);
      for (size_t r2 = 0; r2 < expanded; ++r2) C.at(r2, j * dB + k) = col[r2];
    }

  // Basis F_i of B^{p^s} over B^{p^{s+1}}; candidates E_k * X^{p^s r}.
  std::vector<LocalMatrix> F;
  phi_detail::SpanTracker fspan{R, {}};
  std::vector<std::vector<long long>> small_r =
      phi_detail::all_tuples(R.nvars, static_cast<long long>(R.p));
  for (const auto& r : small_r) {
    for (const auto& Ek : E) {
      if (F.size() == static_cast<size_t>(pn)) break;
      ExpVec scaled(R.nvars);
      for (long v = 0; v < R.nvars; ++v) scaled[v] = r[v] * ps_ll;
      LocalMatrix cand =
          Ek * LocalFrac::of_poly(R, LaurentPoly::monomial(R.nvars, scaled, 1, R.modulus()));
      FracVec coords = phi_detail::subfield_coords(phi_detail::flatten_matrix(cand), R, s + 1);
      if (fspan.contains(coords)) continue;
      F.push_back(cand);
      for (const auto& Em : E) {
        LocalMatrix gen = Em.pow(R.p) * cand;
        fspan.add_if_new(phi_detail::subfield_coords(phi_detail::flatten_matrix(gen), R, s + 1));
      }
    }
  }
  if (F.size() != static_cast<size_t>(pn))
    throw std::logic_error("field_frobenius_split: F-basis count mismatch");

  // Q = (Phi^{s+1}(E_k^p F_i v_j)) with i outermost.
  size_t big = expanded * pn;
  LocalMatrix Q(R, big, big);
  for (size_t i = 0; i < F.size(); ++i)
    for (size_t j = 0; j < dV; ++j)
      for (size_t k = 0; k < dB; ++k) {
        FracVec col = phi_vector_iter(E[k].pow(R.p) * (F[i] * Vbasis[j]), R, s + 1);
        for (size_t r2 = 0; r2 < big; ++r2) Q.at(r2, i * expanded + j * dB + k) = col[r2];
      }

  LocalMatrix Cinv = field_inverse(C);
  FrobeniusSplit out{s, Q * block_diag(Cinv, pn)};

  // Self-check: the splitting identity holds exactly for every generator.
  LocalMatrix Rinv = field_inverse(out.R);
  for (const auto& B : Bs) {
    LocalMatrix lhs = Rinv * phi_matrix_iter(B, s + 1).pow(int_pow(R.p, Int(s + 1))) * out.R;
    LocalMatrix rhs = block_diag(phi_matrix_iter(B, s).pow(ps), pn);
    if (lhs != rhs) throw std::logic_error("field_frobenius_split: splitting identity failed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hensel lifting of the splitting congruence.

struct HenselLift {
  long ell = 0;
  LocalMatrix R;
};

/// Given commuting families B_i, C_i over Z/p^e(X~) with R^{-1} B_i R = C_i
/// mod p^a, produces R~ = R + p^a Q and l with R~^{-1} B_i^{p^l} R~ = C_i^{p^l}
/// mod p^{a+1}.
inline HenselLift hensel_lift_split(const std::vector<LocalMatrix>& Bs, const std::vector<LocalMatrix>& Cs,
                                    const LocalMatrix& R0, int a) {
  if (Bs.size() != Cs.size() || Bs.empty()) throw std::invalid_argument("hensel_lift_split: bad sizes");
  const LocalRing& R = Bs[0].ring();
  if (a < 1 || a > R.e) throw std::invalid_argument("hensel_lift_split: bad level a");
  size_t D = Bs[0].rows();
  for (size_t i = 0; i < Bs.size(); ++i)
    for (size_t j = i + 1; j < Bs.size(); ++j) {
      if (Bs[i] * Bs[j] != Bs[j] * Bs[i] || Cs[i] * Cs[j] != Cs[j] * Cs[i])
        throw CompatibilityViolatedError("hensel_lift_split: input families must commute");
    }
  LocalMatrix R0inv = invert_matrix_hensel(R0);
  std::vector<LocalMatrix> Ms;
  for (size_t i = 0; i < Bs.size(); ++i) {
    LocalMatrix diff = Cs[i] - R0inv * Bs[i] * R0;
    if (!diff.divisible_by_p_power(a))
      throw std::invalid_argument("hensel_lift_split: congruence mod p^a does not hold");
    Ms.push_back(diff.divide_by_p_power(a).reduce_to(1));
  }
  std::vector<LocalMatrix> Cp;
  for (const auto& C : Cs) Cp.push_back(C.reduce_to(1));
  CommutingPhiSolution sol = solve_commuting_phi(Cp, Cp, Ms);
  LocalMatrix Q = -(R0 * sol.Q.lift_to(R.e));
  HenselLift out{sol.ell, R0 + Q.times_p_power(a)};
  // Self-check the lifted congruence.
  Int pl = int_pow(R.p, Int(sol.ell));
  LocalMatrix Rtinv = invert_matrix_hensel(out.R);
  for (size_t i = 0; i < Bs.size(); ++i) {
    LocalMatrix diff = Rtinv * Bs[i].pow(pl) * out.R - Cs[i].pow(pl);
    if (!diff.divisible_by_p_power(std::min(a + 1, R.e)))
      throw std::logic_error("hensel_lift_split: lifted congruence failed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pseudo Frobenius splitting over Z/p^e(X~).

struct PseudoFrobeniusSplit {
  int s = 0;
  LocalMatrix R;  // in GL_{p^{(s+1)n} d}(Z/p^e(X~))
};

/// The exact conjugation identity
///   R^{-1} Phi^{s+1}(A_i)^{p^{s+1}} R = diag_{p^n}(Phi^s(A_i)^{p^s})
/// for pairwise commuting invertible A_i, assembled from the field-level
/// splitting followed by e-1 Hensel lifts. Self-verifying.
inline PseudoFrobeniusSplit pseudo_frobenius_split(const std::vector<LocalMatrix>& As, int t_hint = 0) {
  if (As.empty()) throw std::invalid_argument("pseudo_frobenius_split: empty input");
  const LocalRing& R = As[0].ring();
  size_t d = As[0].rows();
  long long pn = phi_detail::residue_count(R);
  for (size_t i = 0; i < As.size(); ++i)
    for (size_t j = i + 1; j < As.size(); ++j)
      if (As[i] * As[j] != As[j] * As[i])
        throw std::invalid_argument("pseudo_frobenius_split: inputs must commute");

  std::vector<LocalMatrix> Bs;
  for (const auto& A : As) Bs.push_back(A.reduce_to(1));
  int t = t_hint;
  if (t <= 0) {
    // chain bound: the radical index of a local algebra is at most its dim
    t = static_cast<int>(phi_detail::algebra_basis(Bs, R.reduced(1)).size());
  }

  FrobeniusSplit fs = field_frobenius_split(Bs, t);
  int s = fs.s;
  LocalMatrix Rcur = fs.R.lift_to(R.e);

  for (int a = 1; a <= R.e - 1; ++a) {
    std::vector<LocalMatrix> Bext, Cext;
    Int ps1 = int_pow(R.p, Int(s + 1));
    Int ps = int_pow(R.p, Int(s));
    for (const auto& A : As) {
      Bext.push_back(phi_matrix_iter(A, s + 1).pow(ps1));
      Cext.push_back(block_diag(phi_matrix_iter(A, s).pow(ps), pn));
    }
    HenselLift hl = hensel_lift_split(Bext, Cext, Rcur, a);
    // Apply Phi^l to the congruence; the block-diagonal right side picks up a
    // permutation: Phi(diag_b(M)) = P diag_b(Phi(M)) P^{-1}.
    LocalMatrix Rnext = hl.R;
    size_t m = Cext[0].rows() / pn;  // block size of the diagonal side
    LocalMatrix Ptot = LocalMatrix::identity(R, Cext[0].rows() * 1);
    for (long step = 0; step < hl.ell; ++step) {
      Rnext = phi_matrix(Rnext);
      Ptot = phi_matrix(Ptot) * phi_block_permutation(R, pn, m);
      m *= pn;
    }
    Rcur = Rnext * Ptot;
    s += static_cast<int>(hl.ell);
  }

  PseudoFrobeniusSplit out{s, Rcur};
  // Exact self-check of the splitting identity.
  LocalMatrix Rinv = invert_matrix_hensel(out.R);
  Int ps1 = int_pow(R.p, Int(s + 1));
  Int ps = int_pow(R.p, Int(s));
  for (const auto& A : As) {
    LocalMatrix lhs = Rinv * phi_matrix_iter(A, s + 1).pow(ps1) * out.R;
    LocalMatrix rhs = block_diag(phi_matrix_iter(A, s).pow(ps), pn);
    if (lhs != rhs) throw std::logic_error("pseudo_frobenius_split: splitting identity failed");
  }
  (void)d;
  return out;
}

}  // namespace sunit
