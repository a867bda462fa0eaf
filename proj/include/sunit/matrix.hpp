#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/localfrac.hpp"

namespace sunit {

struct SingularModPError : std::domain_error {
  explicit SingularModPError(const std::string& what) : std::domain_error(what) {}
};

using FracVec = std::vector<LocalFrac>;

/// Dense matrix over Z/p^e(X~).
class LocalMatrix {
 public:
  LocalMatrix() : rows_(0), cols_(0) {}
  LocalMatrix(LocalRing ring, size_t rows, size_t cols)
      : ring_(std::move(ring)), rows_(rows), cols_(cols), data_(rows * cols, LocalFrac::zero(ring_)) {}

  static LocalMatrix identity(const LocalRing& ring, size_t n) {
    LocalMatrix m(ring, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = LocalFrac::one(ring);
    return m;
  }
  static LocalMatrix scalar(const LocalRing& ring, size_t n, const LocalFrac& c) {
    LocalMatrix m(ring, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = c;
    return m;
  }

  const LocalRing& ring() const { return ring_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  LocalFrac& at(size_t i, size_t j) { return data_[i * cols_ + j]; }
  const LocalFrac& at(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  LocalMatrix operator+(const LocalMatrix& o) const {
    check_dims(o, true);
    LocalMatrix r = *this;
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = r.data_[i] + o.data_[i];
    return r;
  }
  LocalMatrix operator-(const LocalMatrix& o) const {
    check_dims(o, true);
    LocalMatrix r = *this;
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = r.data_[i] - o.data_[i];
    return r;
  }
  LocalMatrix operator-() const {
    LocalMatrix r = *this;
    for (auto& x : r.data_) x = -x;
    return r;
  }
  LocalMatrix operator*(const LocalMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("LocalMatrix: dimension mismatch in product");
    LocalMatrix r(ring_, rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = 0; k < cols_; ++k) {
        if (at(i, k).is_zero()) continue;
        for (size_t j = 0; j < o.cols_; ++j) {
          if (o.at(k, j).is_zero()) continue;
          r.at(i, j) = r.at(i, j) + at(i, k) * o.at(k, j);
        }
      }
    return r;
  }
  LocalMatrix operator*(const LocalFrac& c) const {
    LocalMatrix r = *this;
    for (auto& x : r.data_) x = x * c;
    return r;
  }
  FracVec operator*(const FracVec& v) const {
    if (v.size() != cols_) throw std::invalid_argument("LocalMatrix: vector size mismatch");
    FracVec r(rows_, LocalFrac::zero(ring_));
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j)
        if (!at(i, j).is_zero() && !v[j].is_zero()) r[i] = r[i] + at(i, j) * v[j];
    return r;
  }

  bool operator==(const LocalMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) return false;
    for (size_t i = 0; i < data_.size(); ++i)
      if (data_[i] != o.data_[i]) return false;
    return true;
  }
  bool operator!=(const LocalMatrix& o) const { return !(*this == o); }

  bool is_zero() const {
    for (const auto& x : data_)
      if (!x.is_zero()) return false;
    return true;
  }

  LocalMatrix transpose() const {
    LocalMatrix r(ring_, cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  LocalMatrix reduce_to(int a) const {
    LocalMatrix r(ring_.reduced(a), rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i].reduce_to(a);
    return r;
  }
  LocalMatrix lift_to(int a) const {
    LocalMatrix r(ring_.reduced(a), rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i].lift_to(a);
    return r;
  }

  // Smallest coefficient valuation across entries (cap = e).
  int valuation() const {
    int v = ring_.e;
    for (const auto& x : data_) v = std::min(v, x.valuation());
    return v;
  }
  bool divisible_by_p_power(int a) const { return valuation() >= std::min(a, ring_.e); }
  LocalMatrix divide_by_p_power(int a) const {
    LocalMatrix r = *this;
    for (auto& x : r.data_) x = x.divide_by_p_power(a);
    return r;
  }
  LocalMatrix times_p_power(int a) const {
    LocalMatrix r = *this;
    for (auto& x : r.data_) x = x.times_p_power(a);
    return r;
  }

  LocalMatrix pow(const Int& k) const;

  std::string str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < rows_; ++i) {
      if (i) os << ", ";
      os << "[";
      for (size_t j = 0; j < cols_; ++j) {
        if (j) os << ", ";
        os << at(i, j).str();
      }
      os << "]";
    }
    os << "]";
    return os.str();
  }

 private:
  void check_dims(const LocalMatrix& o, bool same) const {
    if (same && (rows_ != o.rows_ || cols_ != o.cols_))
      throw std::invalid_argument("LocalMatrix: dimension mismatch");
    if (ring_ != o.ring_) throw std::invalid_argument("LocalMatrix: ring mismatch");
  }

  LocalRing ring_;
  size_t rows_, cols_;
  FracVec data_;
};

// ---------------------------------------------------------------------------
// Field linear algebra (e = 1): every nonzero element of Z/p(X~) is a unit.

struct FieldSolveResult {
  size_t rank = 0;
  std::vector<size_t> pivot_cols;
};

/// In-place Gauss-Jordan over the fraction field; aug columns ride along.
inline FieldSolveResult field_rref(LocalMatrix& A) {
  if (A.ring().e != 1) throw std::invalid_argument("field_rref: requires e = 1");
  FieldSolveResult res;
  size_t n = A.rows(), m = A.cols();
  size_t r = 0;
  for (size_t c = 0; c < m && r < n; ++c) {
    size_t piv = r;
    while (piv < n && A.at(piv, c).is_zero()) ++piv;
    if (piv == n) continue;
    if (piv != r)
      for (size_t j = 0; j < m; ++j) std::swap(A.at(r, j), A.at(piv, j));
    LocalFrac inv = A.at(r, c).inverse();
    for (size_t j = 0; j < m; ++j) A.at(r, j) = A.at(r, j) * inv;
    for (size_t i = 0; i < n; ++i) {
      if (i != r && !A.at(i, c).is_zero()) {
        LocalFrac f = A.at(i, c);
        for (size_t j = 0; j < m; ++j) A.at(i, j) = A.at(i, j) - f * A.at(r, j);
      }
    }
    res.pivot_cols.push_back(c);
    ++r;
  }
  res.rank = r;
  return res;
}

inline size_t field_rank(LocalMatrix A) { return field_rref(A).rank; }

/// Inverse over the fraction field (e = 1); throws SingularModPError.
inline LocalMatrix field_inverse(const LocalMatrix& A) {
  size_t n = A.rows();
  if (n != A.cols()) throw std::invalid_argument("field_inverse: not square");
  LocalMatrix aug(A.ring(), n, 2 * n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, n + i) = LocalFrac::one(A.ring());
  }
  FieldSolveResult res = field_rref(aug);
  size_t left_rank = 0;
  for (size_t c : res.pivot_cols)
    if (c < n) ++left_rank;
  if (left_rank != n) throw SingularModPError("field_inverse: singular matrix");
  LocalMatrix inv(A.ring(), n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv.at(i, j) = aug.at(i, n + j);
  return inv;
}

/// Solves A x = b over the field; nullopt if inconsistent.
inline std::optional<FracVec> field_solve(const LocalMatrix& A, const FracVec& b) {
  size_t n = A.rows(), m = A.cols();
  LocalMatrix aug(A.ring(), n, m + 1);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, m) = b[i];
  }
  FieldSolveResult res = field_rref(aug);
  FracVec x(m, LocalFrac::zero(A.ring()));
  for (size_t r = 0; r < res.pivot_cols.size(); ++r) {
    if (res.pivot_cols[r] == m) return std::nullopt;
    x[res.pivot_cols[r]] = aug.at(r, m);
  }
  return x;
}

/// Exact inverse over Z/p^e(X~) by quadratic Hensel lifting of the mod-p
/// inverse: M' <- M'(2I - M M') doubles the precision each round.
inline LocalMatrix invert_matrix_hensel(const LocalMatrix& M) {
  size_t n = M.rows();
  if (n != M.cols()) throw std::invalid_argument("invert_matrix_hensel: not square");
  const LocalRing& R = M.ring();
  LocalMatrix M1 = M.reduce_to(1);
  LocalMatrix inv1 = field_inverse(M1);  // throws SingularModPError when singular mod p
  LocalMatrix X = inv1.lift_to(R.e);
  LocalMatrix I = LocalMatrix::identity(R, n);
  int precision = 1;
  while (precision < R.e) {
    X = X * (I + I - M * X);
    precision *= 2;
  }
  if (!(M * X == I) || !(X * M == I)) throw std::logic_error("invert_matrix_hensel: lift failed");
  return X;
}

inline LocalMatrix LocalMatrix::pow(const Int& k) const {
  if (rows_ != cols_) throw std::invalid_argument("LocalMatrix::pow: not square");
  if (k < 0) return invert_matrix_hensel(*this).pow(-k);
  LocalMatrix r = identity(ring_, rows_);
  LocalMatrix b = *this;
  Int e = k;
  while (e > 0) {
    if ((e & 1) != 0) r = r * b;
    b = b * b;
    e >>= 1;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Smith-style decomposition over the local PIR Z/p^e(X~).

struct LocalSmith {
  LocalMatrix U, D, V;              // U*M*V = D
  LocalMatrix Uinv, Vinv;           // exact inverses of the transforms
  std::vector<int> diag_valuation;  // valuation of each diagonal entry (e means 0)
};

/// U M V = D with D diagonal, entries in {1, p, ..., p^{e-1}, 0}; U, V
/// invertible over the local ring.
inline LocalSmith smith_form_local(const LocalMatrix& M) {
  const LocalRing& R = M.ring();
  size_t n = M.rows(), m = M.cols();
  LocalSmith s{LocalMatrix::identity(R, n), M, LocalMatrix::identity(R, m),
               LocalMatrix::identity(R, n), LocalMatrix::identity(R, m), {}};
  LocalMatrix& D = s.D;
  auto row_op = [&](size_t dst, size_t src, const LocalFrac& c) {  // row dst += c * row src
    for (size_t j = 0; j < m; ++j) D.at(dst, j) = D.at(dst, j) + c * D.at(src, j);
    for (size_t j = 0; j < n; ++j) s.U.at(dst, j) = s.U.at(dst, j) + c * s.U.at(src, j);
    for (size_t i = 0; i < n; ++i) s.Uinv.at(i, src) = s.Uinv.at(i, src) - c * s.Uinv.at(i, dst);
  };
  auto col_op = [&](size_t dst, size_t src, const LocalFrac& c) {
    for (size_t i = 0; i < n; ++i) D.at(i, dst) = D.at(i, dst) + D.at(i, src) * c;
    for (size_t i = 0; i < m; ++i) s.V.at(i, dst) = s.V.at(i, dst) + s.V.at(i, src) * c;
    for (size_t j = 0; j < m; ++j) s.Vinv.at(src, j) = s.Vinv.at(src, j) - c * s.Vinv.at(dst, j);
  };
  auto row_swap = [&](size_t a, size_t b) {
    if (a == b) return;
    for (size_t j = 0; j < m; ++j) std::swap(D.at(a, j), D.at(b, j));
    for (size_t j = 0; j < n; ++j) std::swap(s.U.at(a, j), s.U.at(b, j));
    for (size_t i = 0; i < n; ++i) std::swap(s.Uinv.at(i, a), s.Uinv.at(i, b));
  };
  auto col_swap = [&](size_t a, size_t b) {
    if (a == b) return;
    for (size_t i = 0; i < n; ++i) std::swap(D.at(i, a), D.at(i, b));
    for (size_t i = 0; i < m; ++i) std::swap(s.V.at(i, a), s.V.at(i, b));
    for (size_t j = 0; j < m; ++j) std::swap(s.Vinv.at(a, j), s.Vinv.at(b, j));
  };
  auto row_scale = [&](size_t i, const LocalFrac& u) {  // u must be a unit
    for (size_t j = 0; j < m; ++j) D.at(i, j) = D.at(i, j) * u;
    for (size_t j = 0; j < n; ++j) s.U.at(i, j) = s.U.at(i, j) * u;
    LocalFrac ui = u.inverse();
    for (size_t k = 0; k < n; ++k) s.Uinv.at(k, i) = s.Uinv.at(k, i) * ui;
  };

  size_t t = 0;
  while (t < n && t < m) {
    int best = R.e;
    size_t pi = t, pj = t;
    for (size_t i = t; i < n; ++i)
      for (size_t j = t; j < m; ++j) {
        int v = D.at(i, j).valuation();
        if (v < best) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    if (best >= R.e) break;  // remaining block is zero
    row_swap(t, pi);
    col_swap(t, pj);
    // pivot = p^best * unit; normalize to exactly p^best
    LocalFrac unit = D.at(t, t).divide_by_p_power(best);
    row_scale(t, unit.inverse());
    for (size_t i = t + 1; i < n; ++i) {
      if (D.at(i, t).is_zero()) continue;
      LocalFrac q = D.at(i, t).divide_by_p_power(best);  // valuation >= best, so exact
      row_op(i, t, -q);
    }
    for (size_t j = t + 1; j < m; ++j) {
      if (D.at(t, j).is_zero()) continue;
      LocalFrac q = D.at(t, j).divide_by_p_power(best);
      col_op(j, t, -q);
    }
    ++t;
  }
  for (size_t i = 0; i < std::min(n, m); ++i) s.diag_valuation.push_back(D.at(i, i).valuation());
  return s;
}

/// Is x in the Z/p^e(X~)-submodule generated by gens (all vectors of equal
/// length)? Solved through the Smith decomposition of the generator matrix.
inline bool submodule_member(const std::vector<FracVec>& gens, const FracVec& x, const LocalRing& R) {
  size_t d = x.size();
  if (gens.empty()) {
    for (const auto& c : x)
      if (!c.is_zero()) return false;
    return true;
  }
  LocalMatrix A(R, d, gens.size());
  for (size_t j = 0; j < gens.size(); ++j)
    for (size_t i = 0; i < d; ++i) A.at(i, j) = gens[j][i];
  LocalSmith s = smith_form_local(A);
  FracVec c = s.U * x;
  size_t r = std::min(d, gens.size());
  for (size_t i = 0; i < d; ++i) {
    int needed = (i < r) ? s.diag_valuation[i] : R.e;
    if (c[i].valuation() < needed) return false;
  }
  return true;
}

}  // namespace sunit
