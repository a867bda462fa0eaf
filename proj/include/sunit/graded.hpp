#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/commuting.hpp"
#include "sunit/matrix.hpp"

namespace sunit {

/// Block sizes d_1..d_e of the decomposition V~ = ⊕_i Z/p^i(X~)^{d_i}.
struct GradedShape {
  std::vector<long> d;  // d[i] is the size at torsion level i+1
  int levels() const { return static_cast<int>(d.size()); }
  long total() const {
    long t = 0;
    for (long x : d) t += x;
    return t;
  }
  bool operator==(const GradedShape& o) const { return d == o.d; }
};

/// Endomorphism of ⊕_i Z/p^i(X~)^{d_i} in block form. Block (i,k) has entries
/// in Z/p^i(X~); for i > k every entry is divisible by p^{i-k}.
class GradedEndo {
 public:
  GradedEndo() = default;
  GradedEndo(LocalRing base, GradedShape shape) : base_(std::move(base)), shape_(std::move(shape)) {
    if (base_.e != shape_.levels()) throw std::invalid_argument("GradedEndo: shape levels must equal e");
    blocks_.resize(shape_.levels());
    for (int i = 0; i < shape_.levels(); ++i) {
      for (int k = 0; k < shape_.levels(); ++k)
        blocks_[i].emplace_back(level_ring(i), shape_.d[i], shape_.d[k]);
    }
  }

  static GradedEndo identity(const LocalRing& base, const GradedShape& shape) {
    GradedEndo f(base, shape);
    for (int i = 0; i < shape.levels(); ++i)
      f.blocks_[i][i] = LocalMatrix::identity(f.level_ring(i), shape.d[i]);
    return f;
  }

  const LocalRing& base() const { return base_; }
  const GradedShape& shape() const { return shape_; }
  LocalRing level_ring(int i) const { return base_.reduced(i + 1); }

  // Blocks are 0-based here; paper indices (1..e) shifted by one.
  const LocalMatrix& block(int i, int k) const { return blocks_[i][k]; }
  void set_block(int i, int k, LocalMatrix m) {
    if (m.rows() != static_cast<size_t>(shape_.d[i]) || m.cols() != static_cast<size_t>(shape_.d[k]))
      throw std::invalid_argument("GradedEndo: block size mismatch");
    if (m.ring() != level_ring(i)) throw std::invalid_argument("GradedEndo: block ring mismatch");
    blocks_[i][k] = std::move(m);
  }

  /// Divisibility constraint p^{i-k} | f_{ik} for i > k.
  bool is_valid() const {
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = 0; k < i; ++k)
        if (!blocks_[i][k].divisible_by_p_power(i - k)) return false;
    return true;
  }

  GradedEndo operator+(const GradedEndo& o) const {
    GradedEndo r = *this;
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = 0; k < shape_.levels(); ++k) r.blocks_[i][k] = r.blocks_[i][k] + o.blocks_[i][k];
    return r;
  }
  GradedEndo operator-(const GradedEndo& o) const {
    GradedEndo r = *this;
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = 0; k < shape_.levels(); ++k) r.blocks_[i][k] = r.blocks_[i][k] - o.blocks_[i][k];
    return r;
  }

  /// Composition (this ∘ o); block rows are reduced mod p^{i+1}.
  GradedEndo operator*(const GradedEndo& o) const {
    if (!(shape_ == o.shape_)) throw std::invalid_argument("GradedEndo: shape mismatch");
    GradedEndo r(base_, shape_);
    int e = shape_.levels();
    for (int i = 0; i < e; ++i) {
      for (int k = 0; k < e; ++k) {
        LocalMatrix acc(level_ring(i), shape_.d[i], shape_.d[k]);
        for (int j = 0; j < e; ++j) {
          if (shape_.d[j] == 0) continue;
          // lift/reduce the (j,k) block of o to level i before multiplying
          LocalMatrix bj = (j >= i) ? o.blocks_[j][k].reduce_to(i + 1) : o.blocks_[j][k].lift_to(i + 1);
          acc = acc + blocks_[i][j] * bj;
        }
        r.blocks_[i][k] = std::move(acc);
      }
    }
    return r;
  }

  bool operator==(const GradedEndo& o) const {
    if (!(shape_ == o.shape_)) return false;
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = 0; k < shape_.levels(); ++k)
        if (blocks_[i][k] != o.blocks_[i][k]) return false;
    return true;
  }
  bool operator!=(const GradedEndo& o) const { return !(*this == o); }

  GradedEndo pow(Int n) const {
    GradedEndo r = identity(base_, shape_);
    GradedEndo b = *this;
    while (n > 0) {
      if ((n & 1) != 0) r = r * b;
      b = b * b;
      n >>= 1;
    }
    return r;
  }

  bool is_block_diagonal() const {
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = 0; k < shape_.levels(); ++k)
        if (i != k && !blocks_[i][k].is_zero()) return false;
    return true;
  }
  bool is_block_lower_triangular() const {
    for (int i = 0; i < shape_.levels(); ++i)
      for (int k = i + 1; k < shape_.levels(); ++k)
        if (!blocks_[i][k].is_zero()) return false;
    return true;
  }

 private:
  LocalRing base_;
  GradedShape shape_;
  std::vector<std::vector<LocalMatrix>> blocks_;
};

/// Exact inverse of an automorphism: back-substitution against the mod-p
/// upper-triangular part, then quadratic lifting in graded arithmetic.
inline GradedEndo graded_inverse(const GradedEndo& f) {
  const GradedShape& shape = f.shape();
  int e = shape.levels();
  GradedEndo X0(f.base(), shape);
  // Diagonal inverses first (must be invertible for an automorphism).
  std::vector<LocalMatrix> dinv;
  for (int i = 0; i < e; ++i) {
    if (shape.d[i] == 0) {
      dinv.push_back(f.block(i, i));
      continue;
    }
    dinv.push_back(invert_matrix_hensel(f.block(i, i)));
  }
  for (int i = 0; i < e; ++i) X0.set_block(i, i, dinv[i]);
  // X0_{i,k} = -f_{ii}^{-1} * sum_{i<j<=k} f_{ij} X0_{jk}  (upper part)
  for (int k = 0; k < e; ++k) {
    for (int i = k - 1; i >= 0; --i) {
      if (shape.d[i] == 0 || shape.d[k] == 0) continue;
      LocalMatrix acc(f.level_ring(i), shape.d[i], shape.d[k]);
      for (int j = i + 1; j <= k; ++j) {
        if (shape.d[j] == 0) continue;
        LocalMatrix xjk = (j >= i) ? X0.block(j, k).reduce_to(i + 1) : X0.block(j, k).lift_to(i + 1);
        acc = acc + f.block(i, j) * xjk;
      }
      X0.set_block(i, k, -(dinv[i] * acc));
    }
  }
  GradedEndo I = GradedEndo::identity(f.base(), shape);
  GradedEndo X = X0;
  int precision = 1;
  while (precision < e) {
    X = X * (I + I - f * X);
    precision *= 2;
  }
  if (f * X != I || X * f != I) throw std::domain_error("graded_inverse: not an automorphism");
  return X;
}

/// Automorphism with its exact two-sided inverse carried along.
struct GradedAuto {
  GradedEndo fwd;
  GradedEndo inv;

  static GradedAuto of(const GradedEndo& f) { return GradedAuto{f, graded_inverse(f)}; }
  static GradedAuto identity(const LocalRing& base, const GradedShape& shape) {
    GradedEndo i = GradedEndo::identity(base, shape);
    return GradedAuto{i, i};
  }
  GradedAuto pow_ptimes(const Int& n) const { return GradedAuto{fwd.pow(n), inv.pow(n)}; }
  GradedAuto operator*(const GradedAuto& o) const {
    return GradedAuto{fwd * o.fwd, o.inv * inv};
  }
  GradedEndo conjugate(const GradedEndo& a) const { return inv * a * fwd; }
};

// ---------------------------------------------------------------------------
// (a,b,c)-triangular machinery (b, c are 1-based as in the block layout).

inline bool is_abc_triangular(const GradedEndo& f, int a, int b, int c) {
  int e = f.shape().levels();
  for (int j = 1; j <= e; ++j)
    for (int k = j + 1; k <= e; ++k) {
      int need = a;
      if (k >= c + 1) need = a + 1;
      if (k == c && j > b && j < c) need = a + 1;
      if (!f.block(j - 1, k - 1).divisible_by_p_power(need)) return false;
    }
  return true;
}

inline bool is_abc_diagonal(const GradedEndo& f, int a, int b, int c) {
  int e = f.shape().levels();
  for (int j = 1; j <= e; ++j)
    for (int k = j + 1; k <= e; ++k)
      if (!f.block(j - 1, k - 1).is_zero()) return false;
  for (int j = 1; j <= e; ++j)
    for (int k = 1; k < j; ++k) {
      int need = a;
      if (j >= c + 1) need = a + 1;
      if (j == c && k > b && k < c) need = a + 1;
      if (!f.block(j - 1, k - 1).divisible_by_p_power(need)) return false;
    }
  return true;
}

struct TriangularizeStep {
  long ell = 0;
  GradedAuto R;
};

/// One step of Lemma-style triangularization: makes the (b,c) blocks of
/// R^{-1} A_i^{p^l} R divisible by p^{a+1} while preserving (a,b,c)-form.
inline TriangularizeStep triangularize_step(std::vector<GradedAuto>& As, int a, int b, int c) {
  if (As.empty()) throw std::invalid_argument("triangularize_step: empty input");
  const LocalRing& base = As[0].fwd.base();
  const GradedShape& shape = As[0].fwd.shape();
  TriangularizeStep out{0, GradedAuto::identity(base, shape)};
  if (a >= b) return out;  // blocks vanish by torsion, nothing to prove
  if (shape.d[b - 1] == 0 || shape.d[c - 1] == 0) return out;

  std::vector<LocalMatrix> Bs, Cs, Ms;
  for (const auto& A : As) {
    Bs.push_back(A.fwd.block(b - 1, b - 1).reduce_to(1));
    Cs.push_back(A.fwd.block(c - 1, c - 1).reduce_to(1));
    Ms.push_back(A.fwd.block(b - 1, c - 1).divide_by_p_power(a).reduce_to(1));
  }
  CommutingPhiSolution sol = solve_commuting_phi(Bs, Cs, Ms);

  GradedEndo R = GradedEndo::identity(base, shape);
  LocalMatrix Q = sol.Q.lift_to(b).times_p_power(a);
  R.set_block(b - 1, c - 1, Q);
  GradedEndo Rinv = GradedEndo::identity(base, shape);
  Rinv.set_block(b - 1, c - 1, -Q);
  out.ell = sol.ell;
  out.R = GradedAuto{R, Rinv};

  Int pl = int_pow(base.p, Int(sol.ell));
  for (auto& A : As) {
    GradedAuto Ap = A.pow_ptimes(pl);
    A = GradedAuto{out.R.conjugate(Ap.fwd), GradedAuto{out.R.inv, out.R.fwd}.conjugate(Ap.inv)};
    if (!is_abc_triangular(A.fwd, a, b, c) || !A.fwd.block(b - 1, c - 1).divisible_by_p_power(a + 1))
      throw std::logic_error("triangularize_step: postcondition failed");
  }
  return out;
}

/// Mirrored single step on the lower blocks of block lower-triangular inputs.
inline TriangularizeStep diagonalize_step(std::vector<GradedAuto>& As, int a, int b, int c) {
  if (As.empty()) throw std::invalid_argument("diagonalize_step: empty input");
  const LocalRing& base = As[0].fwd.base();
  const GradedShape& shape = As[0].fwd.shape();
  TriangularizeStep out{0, GradedAuto::identity(base, shape)};
  if (c - b >= a + 1) return out;  // divisibility constraint already gives p^{a+1}
  if (shape.d[b - 1] == 0 || shape.d[c - 1] == 0) return out;

  std::vector<LocalMatrix> Bs, Cs, Ms;
  for (const auto& A : As) {
    // phi'(S) = S*M_bb - M_cc*S on (c,b)-shaped blocks
    Bs.push_back(A.fwd.block(c - 1, c - 1).reduce_to(1));
    Cs.push_back(A.fwd.block(b - 1, b - 1).reduce_to(1));
    Ms.push_back(-(A.fwd.block(c - 1, b - 1).divide_by_p_power(a).reduce_to(1)));
  }
  CommutingPhiSolution sol = solve_commuting_phi(Bs, Cs, Ms);

  GradedEndo R = GradedEndo::identity(base, shape);
  LocalMatrix Q = sol.Q.lift_to(c).times_p_power(a);
  R.set_block(c - 1, b - 1, -Q);
  GradedEndo Rinv = GradedEndo::identity(base, shape);
  Rinv.set_block(c - 1, b - 1, Q);
  out.ell = sol.ell;
  out.R = GradedAuto{R, Rinv};

  Int pl = int_pow(base.p, Int(sol.ell));
  for (auto& A : As) {
    GradedAuto Ap = A.pow_ptimes(pl);
    A = GradedAuto{out.R.conjugate(Ap.fwd), GradedAuto{out.R.inv, out.R.fwd}.conjugate(Ap.inv)};
    if (!is_abc_diagonal(A.fwd, a, b, c) || !A.fwd.block(c - 1, b - 1).divisible_by_p_power(a + 1))
      throw std::logic_error("diagonalize_step: postcondition failed");
  }
  return out;
}

struct SimultaneousReduction {
  long ell = 0;
  GradedAuto R;
  std::vector<GradedAuto> transformed;
};

/// Simultaneous block lower-triangularization of commuting automorphisms:
/// all R^{-1} A_i^{p^l} R have zero (j,k)-blocks for j < k.
inline SimultaneousReduction simultaneous_triangularize(std::vector<GradedAuto> As) {
  if (As.empty()) throw std::invalid_argument("simultaneous_triangularize: empty input");
  const LocalRing& base = As[0].fwd.base();
  const GradedShape& shape = As[0].fwd.shape();
  SimultaneousReduction out{0, GradedAuto::identity(base, shape), {}};
  int e = shape.levels();
  for (int a = 0; a < e; ++a) {
    for (int c = e; c >= 2; --c) {
      for (int b = c - 1; b >= 1; --b) {
        TriangularizeStep st = triangularize_step(As, a, b, c);
        out.ell += st.ell;
        out.R = out.R * st.R;
      }
    }
  }
  for (auto& A : As)
    if (!A.fwd.is_block_lower_triangular())
      throw std::logic_error("simultaneous_triangularize: postcondition failed");
  out.transformed = std::move(As);
  return out;
}

/// Triangularize, then sweep the lower blocks: all R^{-1} A_i^{p^l} R become
/// block-diagonal.
inline SimultaneousReduction simultaneous_diagonalize(std::vector<GradedAuto> As) {
  SimultaneousReduction tri = simultaneous_triangularize(std::move(As));
  SimultaneousReduction out{tri.ell, tri.R, std::move(tri.transformed)};
  const GradedShape& shape = out.R.fwd.shape();
  int e = shape.levels();
  for (int a = 0; a < e; ++a) {
    for (int c = e; c >= 2; --c) {
      for (int b = c - 1; b >= 1; --b) {
        TriangularizeStep st = diagonalize_step(out.transformed, a, b, c);
        out.ell += st.ell;
        out.R = out.R * st.R;
      }
    }
  }
  for (auto& A : out.transformed)
    if (!A.fwd.is_block_diagonal()) throw std::logic_error("simultaneous_diagonalize: postcondition failed");
  return out;
}

// ---------------------------------------------------------------------------
// Structure of finitely presented modules over the local PIR.

struct ModuleDecomposition {
  GradedShape shape;
  LocalMatrix change_of_basis;  // U with U*M*V = D: maps presentation coords to graded coords
};

/// Shape d_1..d_e of R^d / (column span of the presentation matrix).
inline ModuleDecomposition pir_module_decompose(const LocalMatrix& presentation) {
  const LocalRing& R = presentation.ring();
  LocalSmith s = smith_form_local(presentation);
  GradedShape shape;
  shape.d.assign(R.e, 0);
  size_t d = presentation.rows();
  size_t r = std::min(d, presentation.cols());
  for (size_t i = 0; i < d; ++i) {
    int v = (i < r) ? s.diag_valuation[i] : R.e;  // no relation for trailing coordinates
    if (v == 0) continue;                         // unit relation kills the coordinate
    shape.d[v - 1] += 1;                          // quotient summand Z/p^v(X~)
  }
  return ModuleDecomposition{shape, s.U};
}

// ---------------------------------------------------------------------------
// Stabilization of the generated-algebra chain R_0 ⊇ R_1 ⊇ ...

namespace detail {

// Module basis over Z/p^e(X~) of the algebra generated by gens^{±p^k}.
inline std::vector<FracVec> algebra_module_basis(const std::vector<LocalMatrix>& gens, int k,
                                                 const LocalRing& R) {
  Int pk = int_pow(R.p, Int(k));
  std::vector<LocalMatrix> mult;
  for (const auto& g : gens) {
    mult.push_back(g.pow(pk));
    mult.push_back(invert_matrix_hensel(g).pow(pk));
  }
  size_t d = gens[0].rows();
  std::vector<LocalMatrix> basis = {LocalMatrix::identity(R, d)};
  std::vector<FracVec> flat = {flatten(basis[0])};
  size_t head = 0;
  while (head < basis.size()) {
    LocalMatrix cur = basis[head++];
    for (const auto& m : mult) {
      LocalMatrix prod = cur * m;
      FracVec f = flatten(prod);
      if (!submodule_member(flat, f, R)) {
        basis.push_back(prod);
        flat.push_back(std::move(f));
      }
    }
    if (basis.size() > 4 * d * d * static_cast<size_t>(R.e) + 16)
      throw std::logic_error("algebra_module_basis: closure did not stabilize");
  }
  return flat;
}

}  // namespace detail

/// Least tested l with R_l = R_{l+e}; by the chain argument the descending
/// algebra chain is then stable from l on.
inline long stabilize_generator_chain(const std::vector<LocalMatrix>& gens, int e) {
  if (gens.empty()) throw std::invalid_argument("stabilize_generator_chain: no generators");
  const LocalRing& R = gens[0].ring();
  if (R.e != e) throw std::invalid_argument("stabilize_generator_chain: e mismatch");
  for (long k = 0; k < 64; ++k) {
    auto bk = detail::algebra_module_basis(gens, static_cast<int>(k), R);
    auto bke = detail::algebra_module_basis(gens, static_cast<int>(k) + e, R);
    bool equal = true;
    for (const auto& v : bk) {
      if (!submodule_member(bke, v, R)) {
        equal = false;
        break;
      }
    }
    if (equal) return k;
  }
  throw std::logic_error("stabilize_generator_chain: no stabilization within the search cap");
}

}  // namespace sunit
