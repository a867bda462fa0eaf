#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/automaton.hpp"
#include "sunit/intlinalg.hpp"

namespace sunit {

// ---------------------------------------------------------------------------
// p-succinct sets S(l; a_0..a_r; H) and their finite unions.

struct PSuccinctSet {
  Int p = 2;
  long ell = 1;  // >= 1
  long D = 1;
  std::vector<RatVec> a;   // a[0] is the constant term; a[1..r] carry p^{l k_i}
  std::vector<IntVec> H;   // subgroup generators

  long r() const { return static_cast<long>(a.size()) - 1; }
};

struct PNormalSet {
  Int p = 2;
  long D = 1;
  std::vector<PSuccinctSet> parts;  // empty means the empty set

  bool empty_union() const { return parts.empty(); }
};

/// Checks the two integrality conditions equivalent to S ⊆ Z^D:
/// (p^l - 1) a_i ∈ Z^D for all i, and a_0 + ... + a_r ∈ Z^D.
inline std::optional<std::string> validate_succinct(const PSuccinctSet& S) {
  if (S.ell < 1) return "l must be >= 1";
  if (S.a.empty()) return "missing constant vector a0";
  Int scale = int_pow(S.p, Int(S.ell)) - 1;
  for (size_t i = 0; i < S.a.size(); ++i) {
    if (static_cast<long>(S.a[i].size()) != S.D) return "vector dimension mismatch";
    for (const auto& x : S.a[i])
      if (rat_den(Rat(x * scale)) != 1)
        return "(p^l - 1) a_" + std::to_string(i) + " is not integral";
  }
  RatVec sum(S.D, Rat(0));
  for (const auto& ai : S.a)
    for (long j = 0; j < S.D; ++j) sum[j] += ai[j];
  for (const auto& x : sum)
    if (rat_den(x) != 1) return "a_0 + ... + a_r is not integral";
  for (const auto& h : S.H)
    if (static_cast<long>(h.size()) != S.D) return "subgroup generator dimension mismatch";
  return std::nullopt;
}

namespace pnormal_detail {

/// Automaton for the geometric sums {1 + p^l + ... + p^{l(k-1)} : k >= 0}
/// (words epsilon and (1 0^{l-1})^{k-1} 1).
inline PAutomaton geometric_sum_automaton(int p, long ell) {
  PAutomaton A;
  A.alphabet = {p, 1};
  int start = A.add_state(true);  // k = 0 gives 0
  int one = A.add_state(true);    // just read a 1
  A.initial = start;
  std::vector<int> zeros;  // chain of l-1 zero states
  int prev = one;
  for (long i = 0; i + 1 < ell; ++i) {
    int z = A.add_state(false);
    A.set_transition(prev, Symbol{0}, z);
    prev = z;
  }
  A.set_transition(start, Symbol{1}, one);
  A.set_transition(prev, Symbol{1}, one);
  A.make_total();
  return A;
}

inline Int rat_scaled(const Rat& x, const Int& scale) {
  Rat y = x * scale;
  if (rat_den(y) != 1) throw std::invalid_argument("rat_scaled: not integral after scaling");
  return rat_num(y);
}

}  // namespace pnormal_detail

/// {x + y : x in VS(A), y in VS(B)} for automata of equal dimension.
inline PAutomaton minkowski_sum(const PAutomaton& A, const PAutomaton& B) {
  int d = A.alphabet.d;
  IntMat phi(d, IntVec(2 * d, 0));
  for (int j = 0; j < d; ++j) {
    phi[j][j] = 1;
    phi[j][d + j] = 1;
  }
  return linear_image(automaton_product(A, B), phi);
}

/// Automaton whose value set is exactly S. Uses the geometric-sum form
/// x = (a_0 + ... + a_r) + sum_i G_{k_i} (p^l - 1) a_i + h with every vector
/// integral; assembled as a chain of pairwise sums to keep carries small.
inline PAutomaton succinct_to_automaton(const PSuccinctSet& S) {
  if (auto err = validate_succinct(S)) throw std::invalid_argument("succinct_to_automaton: " + *err);
  int p = static_cast<int>(S.p);
  long r = S.r();
  Int scale = int_pow(S.p, Int(S.ell)) - 1;
  IntVec c(S.D, 0);
  {
    RatVec sum(S.D, Rat(0));
    for (const auto& ai : S.a)
      for (long j = 0; j < S.D; ++j) sum[j] += ai[j];
    for (long j = 0; j < S.D; ++j) c[j] = rat_num(sum[j]);
  }
  // the singleton {c}
  PAutomaton acc = universal_automaton(p, static_cast<int>(S.D));
  for (long j = 0; j < S.D; ++j) {
    IntVec row(S.D, 0);
    row[j] = 1;
    acc = boolean_op_saturated(BoolKind::Intersect, acc, affine_equality_automaton(row, c[j], p));
  }
  // + G_{k_i} * (p^l - 1) a_i for each i
  for (long i = 1; i <= r; ++i) {
    IntMat col(S.D, IntVec(1, 0));
    for (long j = 0; j < S.D; ++j) col[j][0] = pnormal_detail::rat_scaled(S.a[i][j], scale);
    PAutomaton term = linear_image(pnormal_detail::geometric_sum_automaton(p, S.ell), col);
    acc = minkowski_sum(acc, term);
  }
  // + H
  if (!S.H.empty()) acc = minkowski_sum(acc, automaton_for_subgroup(S.H, p, static_cast<int>(S.D)));
  return acc;
}

inline PAutomaton pnormal_to_automaton(const PNormalSet& S) {
  if (S.parts.empty()) return empty_automaton(static_cast<int>(S.p), static_cast<int>(S.D));
  PAutomaton acc = succinct_to_automaton(S.parts[0]);
  for (size_t i = 1; i < S.parts.size(); ++i)
    acc = boolean_op(BoolKind::Union, acc, succinct_to_automaton(S.parts[i]));
  return acc;
}

/// Membership via the automaton route (value word search).
inline bool pnormal_member(const PNormalSet& S, const IntVec& x) {
  for (const auto& part : S.parts) {
    PAutomaton A = succinct_to_automaton(part);
    if (value_member(A, x)) return true;
  }
  return false;
}

inline std::set<IntVec> pnormal_window(const PNormalSet& S, long B) {
  std::set<IntVec> out;
  for (const auto& part : S.parts) {
    PAutomaton A = succinct_to_automaton(part);
    auto w = enumerate_window(A, B);
    out.insert(w.begin(), w.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rectangular cosets and the solution structure of a_0 + sum q^{k_i} a_i ∈ G.

struct RectangularCoset {
  IntVec base;                                        // epsilon_0 in N^R
  std::vector<std::pair<Int, std::vector<int>>> gens;  // (c_i, support S_i), disjoint supports

  bool contains(const IntVec& k) const {
    // solve k = base + sum n_i * gen_i with n_i in N: supports disjoint makes
    // the n_i determined per support
    IntVec rem = k;
    for (size_t i = 0; i < base.size(); ++i) rem[i] -= base[i];
    std::vector<Int> n(gens.size(), -1);
    std::vector<int> owner(base.size(), -1);
    for (size_t g = 0; g < gens.size(); ++g)
      for (int s : gens[g].second) owner[s] = static_cast<int>(g);
    for (size_t i = 0; i < base.size(); ++i) {
      if (owner[i] < 0) {
        if (rem[i] != 0) return false;
        continue;
      }
      const Int& c = gens[owner[i]].first;
      if (c == 0) {
        if (rem[i] != 0) return false;
        continue;
      }
      if (rem[i] % c != 0 || rem[i] < 0) return false;
      Int ni = rem[i] / c;
      if (n[owner[i]] == -1) n[owner[i]] = ni;
      else if (n[owner[i]] != ni) return false;
    }
    return true;
  }
};

namespace pnormal_detail {

struct QuotientNorm {
  // max-norm of the coordinates over a fixed complement basis of span_Q(G)
  RatMat M;       // square matrix [G-basis | complement] as columns
  size_t g_rank;  // number of G-basis columns

  static QuotientNorm build(const std::vector<IntVec>& G, long D) {
    std::vector<RatVec> pool;
    for (const auto& g : G) pool.emplace_back(g.begin(), g.end());
    std::vector<size_t> keep = extend_independent({}, pool);
    std::vector<RatVec> basis;
    for (size_t k : keep) basis.push_back(pool[k]);
    size_t g_rank = basis.size();
    // extend by standard vectors in fixed order
    std::vector<RatVec> std_pool;
    for (long i = 0; i < D; ++i) {
      RatVec e(D, Rat(0));
      e[i] = 1;
      std_pool.push_back(std::move(e));
    }
    for (size_t k : extend_independent(basis, std_pool)) basis.push_back(std_pool[k]);
    QuotientNorm N;
    N.g_rank = g_rank;
    N.M.assign(D, RatVec(D, Rat(0)));
    for (size_t c = 0; c < basis.size(); ++c)
      for (long r = 0; r < D; ++r) N.M[r][c] = basis[c][r];
    return N;
  }

  Rat norm(const IntVec& x) const {
    RatVec rhs(x.begin(), x.end());
    auto sol = solve_rational(M, rhs);
    if (!sol) throw std::logic_error("QuotientNorm: basis does not span");
    Rat best = 0;
    for (size_t i = g_rank; i < sol->size(); ++i) {
      Rat v = (*sol)[i] < 0 ? Rat(-(*sol)[i]) : (*sol)[i];
      if (v > best) best = v;
    }
    return best;
  }
};

struct RectVar {
  IntVec vec;  // coefficient vector a_i
  int slot;    // original index (1-based position in k_1..k_R -> 0-based slot)
};

// Recursive engine for Lemma-style rectangular decomposition.
inline std::vector<RectangularCoset> rect_solve(const Int& q, const std::vector<IntVec>& G,
                                                IntVec a0, std::vector<RectVar> vars, int R_total) {
  long D = static_cast<long>(a0.size());
  std::vector<RectangularCoset> out;
  if (vars.empty()) {
    if (lattice_member(G, a0)) out.push_back(RectangularCoset{IntVec(R_total, 0), {}});
    return out;
  }
  QuotientNorm N = QuotientNorm::build(G, D);

  // Case 1: some a_i lies in the rational span of G.
  for (size_t vi = 0; vi < vars.size(); ++vi) {
    if (N.norm(vars[vi].vec) != 0) continue;
    // find t with t*a_i in G
    RatMat A(D, RatVec(G.size(), Rat(0)));
    for (size_t j = 0; j < G.size(); ++j)
      for (long r = 0; r < D; ++r) A[r][j] = Rat(G[j][r]);
    RatVec rhs(vars[vi].vec.begin(), vars[vi].vec.end());
    auto sol = solve_rational(A, rhs);
    if (!sol) throw std::logic_error("rect_solve: span membership inconsistent");
    Int t = 1;
    for (const auto& y : *sol) t = int_lcm(t, rat_den(y));
    // b < c with q^c = q^b mod t
    Int b = 1, c = 2;
    {
      std::map<Int, Int> seen;  // q^k mod t -> k
      Int pow = mod_floor(q, t);
      Int k = 1;
      while (true) {
        auto it = seen.find(pow);
        if (it != seen.end()) {
          b = it->second;
          c = k;
          break;
        }
        seen[pow] = k;
        pow = mod_floor(pow * q, t);
        ++k;
      }
    }
    std::vector<RectVar> rest = vars;
    rest.erase(rest.begin() + vi);
    long long bl = b.convert_to<long long>(), cl = c.convert_to<long long>();
    for (long long r = 0; r < cl; ++r) {
      IntVec a0r = a0;
      Int qr = int_pow(q, Int(r));
      for (long j = 0; j < D; ++j) a0r[j] += qr * vars[vi].vec[j];
      auto sub = rect_solve(q, G, a0r, rest, R_total);
      for (auto& cs : sub) {
        cs.base[vars[vi].slot] = r;
        if (r >= bl) cs.gens.push_back({c - b, {vars[vi].slot}});
        out.push_back(std::move(cs));
      }
    }
    return out;
  }

  // Case 2: all norms positive; some pair of exponents is within D_gap.
  long long gap = 0;
  {
    Rat total = 0;
    std::vector<Rat> norms;
    for (const auto& v : vars) {
      norms.push_back(N.norm(v.vec));
      total += norms.back();
    }
    Rat n0 = N.norm(a0);
    total += n0;
    for (size_t i = 0; i < vars.size(); ++i) {
      long long Dg = 0;
      Rat lhs = norms[i];
      while (lhs * int_pow(q, Int(Dg)) <= total - norms[i]) ++Dg;
      gap = std::max(gap, Dg);
    }
  }
  // pairs (0, j): k_j = r in [0, gap]
  for (size_t vj = 0; vj < vars.size(); ++vj) {
    for (long long r = 0; r <= gap; ++r) {
      IntVec a0r = a0;
      Int qr = int_pow(q, Int(r));
      for (long j = 0; j < D; ++j) a0r[j] += qr * vars[vj].vec[j];
      std::vector<RectVar> rest = vars;
      rest.erase(rest.begin() + vj);
      auto sub = rect_solve(q, G, a0r, rest, R_total);
      for (auto& cs : sub) {
        cs.base[vars[vj].slot] = r;
        out.push_back(std::move(cs));
      }
    }
  }
  // pairs (i, j), i != j: k_j = k_i + r with r in [1, gap] (r = 0 included once)
  for (size_t vi = 0; vi < vars.size(); ++vi) {
    for (size_t vj = 0; vj < vars.size(); ++vj) {
      if (vi == vj) continue;
      if (vj < vi) continue;  // handle unordered pairs;签 r may be negative below
      for (long long r = (vi == vj ? 1 : 0); r <= gap; ++r) {
        // k_j = k_i + r
        for (int dir = 0; dir < (r == 0 ? 1 : 2); ++dir) {
          size_t keep = dir == 0 ? vi : vj;
          size_t drop = dir == 0 ? vj : vi;
          std::vector<RectVar> rest = vars;
          RectVar kept = vars[keep], dropped = vars[drop];
          Int qr = int_pow(q, Int(r));
          // a_keep += q^r a_drop
          RectVar merged = kept;
          for (long j = 0; j < D; ++j) merged.vec[j] += qr * dropped.vec[j];
          std::vector<RectVar> next;
          for (size_t t2 = 0; t2 < vars.size(); ++t2) {
            if (t2 == drop) continue;
            next.push_back(t2 == keep ? merged : vars[t2]);
          }
          auto sub = rect_solve(q, G, a0, next, R_total);
          for (auto& cs : sub) {
            // slot of dropped follows slot of kept with offset r
            cs.base[dropped.slot] = cs.base[kept.slot] + r;
            for (auto& [cc, sup] : cs.gens)
              for (int s : std::vector<int>(sup))
                if (s == kept.slot) sup.push_back(dropped.slot);
            out.push_back(std::move(cs));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace pnormal_detail

/// The set {(k_1..k_R) ∈ N^R : a_0 + sum q^{k_i} a_i ∈ G} as a finite union of
/// rectangular cosets.
inline std::vector<RectangularCoset> rectangular_solutions(const Int& q, const std::vector<IntVec>& G,
                                                           const std::vector<IntVec>& a) {
  if (a.empty()) throw std::invalid_argument("rectangular_solutions: need a_0");
  int R = static_cast<int>(a.size()) - 1;
  std::vector<pnormal_detail::RectVar> vars;
  for (int i = 1; i <= R; ++i) vars.push_back({a[i], i - 1});
  std::vector<IntVec> Gg = G;
  if (Gg.empty()) Gg.push_back(IntVec(a[0].size(), 0));  // the zero lattice
  return pnormal_detail::rect_solve(q, Gg, a[0], vars, R);
}

// ---------------------------------------------------------------------------
// Intersection of p-normal sets (effectively p-normal).

namespace pnormal_detail {

inline RatVec rat_of_int(const IntVec& v) { return RatVec(v.begin(), v.end()); }

// projection machinery for the split Q^D = U + V + V' + W
struct SplitProjector {
  RatMat M;  // columns: U | V | V' | W
  size_t nu, nv, nvp, nw;

  RatVec coords(const RatVec& x) const {
    auto sol = solve_rational(M, x);
    if (!sol) throw std::logic_error("SplitProjector: solve failed");
    return *sol;
  }
  RatVec project_UV(const RatVec& x) const {
    RatVec c = coords(x);
    RatVec out(x.size(), Rat(0));
    for (size_t j = 0; j < nu + nv; ++j)
      for (size_t r = 0; r < x.size(); ++r) out[r] += c[j] * M[r][j];
    return out;
  }
  RatVec project_VpW(const RatVec& x) const {
    RatVec c = coords(x);
    RatVec out(x.size(), Rat(0));
    for (size_t j = nu + nv; j < nu + nv + nvp + nw; ++j)
      for (size_t r = 0; r < x.size(); ++r) out[r] += c[j] * M[r][j];
    return out;
  }
};

/// Succinct-set intersection with a common exponent l already arranged.
inline std::vector<PSuccinctSet> intersect_succinct_aligned(const PSuccinctSet& S, const PSuccinctSet& Sp) {
  long D = S.D;
  long L = S.ell;
  std::vector<PSuccinctSet> out;

  // U = basis of H ∩ H'
  std::vector<IntVec> U = lattice_intersection(S.H, Sp.H);
  {  // reduce to an independent generating subset for the projector split
    std::vector<RatVec> pool;
    for (const auto& g : U) pool.push_back(rat_of_int(g));
    std::vector<IntVec> U2;
    for (size_t k : extend_independent({}, pool)) U2.push_back(U[k]);
    // keep the full generator list for lattice arithmetic but independent for spans
    U.swap(U2);
    // note: ZU below uses the intersection lattice itself
  }
  std::vector<IntVec> Ufull = lattice_intersection(S.H, Sp.H);

  // V extends U inside H, V' extends U inside H'
  std::vector<RatVec> Urat;
  for (const auto& g : U) Urat.push_back(rat_of_int(g));
  std::vector<IntVec> V, Vp;
  {
    std::vector<RatVec> pool;
    for (const auto& g : S.H) pool.push_back(rat_of_int(g));
    for (size_t k : extend_independent(Urat, pool)) V.push_back(S.H[k]);
  }
  {
    std::vector<RatVec> pool;
    for (const auto& g : Sp.H) pool.push_back(rat_of_int(g));
    for (size_t k : extend_independent(Urat, pool)) Vp.push_back(Sp.H[k]);
  }
  // W completes to a maximal independent set of Q^D
  std::vector<RatVec> uvv;
  for (const auto& g : U) uvv.push_back(rat_of_int(g));
  for (const auto& g : V) uvv.push_back(rat_of_int(g));
  for (const auto& g : Vp) uvv.push_back(rat_of_int(g));
  std::vector<IntVec> W;
  {
    std::vector<RatVec> pool;
    for (long i = 0; i < D; ++i) {
      RatVec e(D, Rat(0));
      e[i] = 1;
      pool.push_back(std::move(e));
    }
    for (size_t k : extend_independent(uvv, pool)) {
      IntVec w(D, 0);
      w[k] = 1;
      W.push_back(std::move(w));
    }
  }
  SplitProjector proj;
  proj.nu = U.size();
  proj.nv = V.size();
  proj.nvp = Vp.size();
  proj.nw = W.size();
  proj.M.assign(D, RatVec(U.size() + V.size() + Vp.size() + W.size(), Rat(0)));
  {
    size_t c = 0;
    for (const auto& g : U) {
      for (long r = 0; r < D; ++r) proj.M[r][c] = Rat(g[r]);
      ++c;
    }
    for (const auto& g : V) {
      for (long r = 0; r < D; ++r) proj.M[r][c] = Rat(g[r]);
      ++c;
    }
    for (const auto& g : Vp) {
      for (long r = 0; r < D; ++r) proj.M[r][c] = Rat(g[r]);
      ++c;
    }
    for (const auto& g : W) {
      for (long r = 0; r < D; ++r) proj.M[r][c] = Rat(g[r]);
      ++c;
    }
  }

  // coset representatives of H/(ZU + ZV) and H'/(ZU + ZV')
  std::vector<IntVec> UV = U;
  UV.insert(UV.end(), V.begin(), V.end());
  std::vector<IntVec> UVp = U;
  UVp.insert(UVp.end(), Vp.begin(), Vp.end());
  std::vector<IntVec> reps = quotient_representatives(S.H, UV);
  std::vector<IntVec> reps_p = quotient_representatives(Sp.H, UVp);
  if (S.H.empty()) reps = {IntVec(D, 0)};
  if (Sp.H.empty()) reps_p = {IntVec(D, 0)};
  for (auto& rep : reps)
    if (rep.empty()) rep.assign(D, 0);
  for (auto& rep : reps_p)
    if (rep.empty()) rep.assign(D, 0);

  long r = S.r(), rp = Sp.r();
  Int qL = int_pow(S.p, Int(L));

  std::vector<IntVec> Glat = UV;
  Glat.insert(Glat.end(), Vp.begin(), Vp.end());

  for (const auto& h : reps) {
    for (const auto& hp : reps_p) {
      // common denominator for the Lambda data
      Int M = 1;
      RatVec at0(D, Rat(0));
      for (long j = 0; j < D; ++j) at0[j] = S.a[0][j] + Rat(h[j]) - Sp.a[0][j] - Rat(hp[j]);
      for (const auto& x : at0) M = int_lcm(M, rat_den(x));
      for (long i = 1; i <= r; ++i)
        for (const auto& x : S.a[i]) M = int_lcm(M, rat_den(x));
      for (long i = 1; i <= rp; ++i)
        for (const auto& x : Sp.a[i]) M = int_lcm(M, rat_den(x));
      std::vector<IntVec> lam_a(1 + r + rp, IntVec(D, 0));
      for (long j = 0; j < D; ++j) lam_a[0][j] = rat_num(Rat(at0[j] * M));
      for (long i = 1; i <= r; ++i)
        for (long j = 0; j < D; ++j) lam_a[i][j] = rat_num(Rat(S.a[i][j] * M));
      for (long i = 1; i <= rp; ++i)
        for (long j = 0; j < D; ++j) lam_a[r + i][j] = rat_num(Rat(-Sp.a[i][j] * M));
      std::vector<IntVec> Gm;
      for (const auto& g : Glat) {
        IntVec gm(D);
        for (long j = 0; j < D; ++j) gm[j] = g[j] * M;
        Gm.push_back(std::move(gm));
      }
      std::vector<RectangularCoset> Lambda = rectangular_solutions(qL, Gm, lam_a);

      // slot vectors entering T
      std::vector<RatVec> w(r + rp);
      for (long i = 0; i < r; ++i) w[i] = proj.project_VpW(S.a[i + 1]);
      for (long i = 0; i < rp; ++i) w[r + i] = proj.project_UV(Sp.a[i + 1]);
      RatVec t0(D, Rat(0));
      {
        RatVec lhs(D, Rat(0)), rhs(D, Rat(0));
        for (long j = 0; j < D; ++j) {
          lhs[j] = S.a[0][j] + Rat(h[j]);
          rhs[j] = Sp.a[0][j] + Rat(hp[j]);
        }
        RatVec pl = proj.project_VpW(lhs), pr = proj.project_UV(rhs);
        for (long j = 0; j < D; ++j) t0[j] = pl[j] + pr[j];
      }

      for (const auto& coset : Lambda) {
        // constant slots and generator groups
        RatVec base = t0;
        for (long i = 0; i < r + rp; ++i) {
          bool in_gen = false;
          for (const auto& [cc, sup] : coset.gens)
            for (int s : sup) in_gen |= (s == i);
          if (!in_gen) {
            Int qe = int_pow(qL, coset.base[i]);
            for (long j = 0; j < D; ++j) base[j] += Rat(qe) * w[i][j];
          }
        }
        std::vector<std::pair<Int, RatVec>> genvecs;  // (c_j, a~_j)
        for (const auto& [cc, sup] : coset.gens) {
          if (cc == 0) throw std::logic_error("intersect_normal: zero-step generator");
          RatVec acc(D, Rat(0));
          for (int s : sup) {
            Int qe = int_pow(qL, coset.base[s]);
            for (long j = 0; j < D; ++j) acc[j] += Rat(qe) * w[s][j];
          }
          genvecs.push_back({cc, std::move(acc)});
        }
        // align generator periods to a common multiple C
        Int C = 1;
        for (const auto& [cc, v] : genvecs) C = int_lcm(C, cc);
        // enumerate residues i_j in [0, C/c_j)
        std::vector<Int> limits;
        for (const auto& [cc, v] : genvecs) limits.push_back(C / cc);
        std::vector<Int> idx(genvecs.size(), 0);
        while (true) {
          PSuccinctSet piece;
          piece.p = S.p;
          piece.D = D;
          piece.ell = static_cast<long>(L * C.convert_to<long long>());
          RatVec a0 = base;
          std::vector<RatVec> as;
          for (size_t g = 0; g < genvecs.size(); ++g) {
            Int qe = int_pow(qL, genvecs[g].first * idx[g]);
            RatVec ag(D, Rat(0));
            for (long j = 0; j < D; ++j) ag[j] = Rat(qe) * genvecs[g].second[j];
            as.push_back(std::move(ag));
          }
          piece.a.push_back(a0);
          for (auto& ag : as) piece.a.push_back(std::move(ag));
          for (const auto& u : Ufull) piece.H.push_back(u);
          if (auto err = validate_succinct(piece))
            throw std::logic_error("intersect_normal: invalid piece: " + *err);
          out.push_back(std::move(piece));
          size_t k = 0;
          while (k < idx.size()) {
            idx[k] += 1;
            if (idx[k] < limits[k]) break;
            idx[k] = 0;
            ++k;
          }
          if (k == idx.size()) break;
        }
      }
    }
  }
  return out;
}

inline std::vector<PSuccinctSet> align_exponent(const PSuccinctSet& S, long L) {
  if (S.ell == L) return {S};
  long factor = L / S.ell;
  std::vector<PSuccinctSet> out;
  long r = S.r();
  std::vector<long> idx(r, 0);
  while (true) {
    PSuccinctSet T = S;
    T.ell = L;
    for (long i = 0; i < r; ++i) {
      Int qe = int_pow(S.p, Int(S.ell * idx[i]));
      for (long j = 0; j < S.D; ++j) T.a[i + 1][j] = S.a[i + 1][j] * Rat(qe);
    }
    out.push_back(std::move(T));
    long k = 0;
    while (k < r) {
      idx[k] += 1;
      if (idx[k] < factor) break;
      idx[k] = 0;
      ++k;
    }
    if (k == r || r == 0) break;
  }
  return out;
}

}  // namespace pnormal_detail

inline std::string succinct_to_text(const PSuccinctSet& S);

/// The intersection of two p-normal sets, computed through the rectangular
/// coset
/// structure of the exponent constraints.
inline PNormalSet intersect_normal(const PNormalSet& S, const PNormalSet& T) {
  if (S.p != T.p || S.D != T.D) throw std::invalid_argument("intersect_normal: base/dimension mismatch");
  PNormalSet out;
  out.p = S.p;
  out.D = S.D;
  for (const auto& s : S.parts) {
    for (const auto& t : T.parts) {
      long L = static_cast<long>(int_lcm(s.ell, t.ell).convert_to<long long>());
      for (const auto& sa : pnormal_detail::align_exponent(s, L))
        for (const auto& ta : pnormal_detail::align_exponent(t, L)) {
          auto pieces = pnormal_detail::intersect_succinct_aligned(sa, ta);
          for (auto& piece : pieces) out.parts.push_back(std::move(piece));
        }
    }
  }
  // drop syntactic duplicates
  std::set<std::string> seen;
  std::vector<PSuccinctSet> unique_parts;
  for (auto& part : out.parts)
    if (seen.insert(succinct_to_text(part)).second) unique_parts.push_back(std::move(part));
  out.parts = std::move(unique_parts);
  return out;
}

// ---------------------------------------------------------------------------
// Text format: `succinct p=2 l=3 a0=[1/2,0] a1=[1/2,0] H=[[1,1]]` stanzas.

inline std::string succinct_to_text(const PSuccinctSet& S) {
  std::ostringstream os;
  os << "succinct p=" << S.p.str() << " l=" << S.ell;
  for (size_t i = 0; i < S.a.size(); ++i) {
    os << " a" << i << "=[";
    for (long j = 0; j < S.D; ++j) {
      if (j) os << ",";
      os << to_string(S.a[i][j]);
    }
    os << "]";
  }
  os << " H=[";
  for (size_t i = 0; i < S.H.size(); ++i) {
    if (i) os << ",";
    os << "[";
    for (long j = 0; j < S.D; ++j) {
      if (j) os << ",";
      os << S.H[i][j].str();
    }
    os << "]";
  }
  os << "]";
  return os.str();
}

inline std::string pnormal_to_text(const PNormalSet& S) {
  std::ostringstream os;
  os << "pnormal p=" << S.p.str() << " D=" << S.D << "\n";
  for (const auto& part : S.parts) os << succinct_to_text(part) << "\n";
  return os.str();
}

namespace pnormal_detail {

inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(Int(s));
  return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
}

inline std::vector<std::string> split_brackets(const std::string& s) {
  // splits "[a,b],[c,d]" into "a,b" and "c,d"
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[') {
      if (depth++ == 0) {
        cur.clear();
        continue;
      }
    }
    if (c == ']') {
      if (--depth == 0) {
        out.push_back(cur);
        continue;
      }
    }
    if (depth >= 1) cur += c;
  }
  return out;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c)))
      cur += c;
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace pnormal_detail

inline PSuccinctSet parse_succinct_line(const std::string& line) {
  PSuccinctSet S;
  std::istringstream is(line);
  std::string tok;
  is >> tok;  // "succinct"
  std::map<int, RatVec> avecs;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("parse_succinct: bad token " + tok);
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "p") S.p = Int(val);
    else if (key == "l") S.ell = std::stol(val);
    else if (key == "H") {
      std::string rest = val;
      // H value may contain spaces? format has none
      auto rows = pnormal_detail::split_brackets(rest.substr(1, rest.size() - 2));
      for (const auto& row : rows) {
        IntVec h;
        for (const auto& c : pnormal_detail::split_commas(row)) h.push_back(Int(c));
        S.H.push_back(std::move(h));
      }
    } else if (key[0] == 'a') {
      int idx = std::stoi(key.substr(1));
      RatVec v;
      for (const auto& c : pnormal_detail::split_commas(val.substr(1, val.size() - 2)))
        v.push_back(pnormal_detail::parse_rat(c));
      avecs[idx] = std::move(v);
    }
  }
  for (auto& [idx, v] : avecs) {
    if (static_cast<int>(S.a.size()) != idx) throw std::invalid_argument("parse_succinct: gap in a_i");
    S.D = static_cast<long>(v.size());
    S.a.push_back(std::move(v));
  }
  return S;
}

inline PNormalSet parse_pnormal_text(const std::string& text) {
  PNormalSet S;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "pnormal") {
      std::string tok;
      while (ls >> tok) {
        auto eq = tok.find('=');
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "p") S.p = Int(val);
        if (key == "D") S.D = std::stol(val);
      }
      have_header = true;
    } else if (head == "succinct") {
      PSuccinctSet part = parse_succinct_line(line);
      if (!have_header) {
        S.p = part.p;
        S.D = part.D;
        have_header = true;
      }
      S.parts.push_back(std::move(part));
    }
  }
  return S;
}

}  // namespace sunit
