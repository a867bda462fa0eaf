#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/matrix.hpp"

namespace sunit {

struct FactorizationUnavailableError : std::domain_error {
  explicit FactorizationUnavailableError(const std::string& what) : std::domain_error(what) {}
};

/// Univariate polynomials with coefficients in the fraction field Z/p(X~)
/// (coefficient index = degree). Used for minimal polynomials of commuting
/// operators.
class UPoly {
 public:
  UPoly() = default;
  UPoly(LocalRing ring, FracVec coeffs) : ring_(std::move(ring)), c_(std::move(coeffs)) {
    if (ring_.e != 1) throw std::invalid_argument("UPoly: coefficients must live in a field (e = 1)");
    trim();
  }
  static UPoly zero(const LocalRing& ring) { return UPoly(ring, {}); }
  static UPoly one(const LocalRing& ring) { return UPoly(ring, {LocalFrac::one(ring)}); }
  static UPoly lambda(const LocalRing& ring) {
    return UPoly(ring, {LocalFrac::zero(ring), LocalFrac::one(ring)});
  }

  const LocalRing& ring() const { return ring_; }
  const FracVec& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const LocalFrac& coeff(size_t i) const { return c_[i]; }
  LocalFrac coeff_or_zero(size_t i) const { return i < c_.size() ? c_[i] : LocalFrac::zero(ring_); }

  bool has_constant_coeffs() const {
    for (const auto& x : c_)
      if (!(x.num().is_constant() && x.den().is_constant())) return false;
    return true;
  }

  UPoly operator+(const UPoly& o) const {
    FracVec r(std::max(c_.size(), o.c_.size()), LocalFrac::zero(ring_));
    for (size_t i = 0; i < r.size(); ++i) r[i] = coeff_or_zero(i) + o.coeff_or_zero(i);
    return UPoly(ring_, std::move(r));
  }
  UPoly operator-(const UPoly& o) const {
    FracVec r(std::max(c_.size(), o.c_.size()), LocalFrac::zero(ring_));
    for (size_t i = 0; i < r.size(); ++i) r[i] = coeff_or_zero(i) - o.coeff_or_zero(i);
    return UPoly(ring_, std::move(r));
  }
  UPoly operator*(const UPoly& o) const {
    if (is_zero() || o.is_zero()) return zero(ring_);
    FracVec r(c_.size() + o.c_.size() - 1, LocalFrac::zero(ring_));
    for (size_t i = 0; i < c_.size(); ++i)
      for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] = r[i + j] + c_[i] * o.c_[j];
    return UPoly(ring_, std::move(r));
  }
  UPoly operator*(const LocalFrac& s) const {
    FracVec r = c_;
    for (auto& x : r) x = x * s;
    return UPoly(ring_, std::move(r));
  }

  bool operator==(const UPoly& o) const {
    if (c_.size() != o.c_.size()) return false;
    for (size_t i = 0; i < c_.size(); ++i)
      if (c_[i] != o.c_[i]) return false;
    return true;
  }

  UPoly monic() const {
    if (is_zero()) return *this;
    return *this * c_.back().inverse();
  }

  std::pair<UPoly, UPoly> divmod(const UPoly& d) const {
    if (d.is_zero()) throw std::domain_error("UPoly: division by zero");
    FracVec rem = c_;
    FracVec quo(rem.size() >= d.c_.size() ? rem.size() - d.c_.size() + 1 : 0, LocalFrac::zero(ring_));
    LocalFrac lead_inv = d.c_.back().inverse();
    while (rem.size() >= d.c_.size() && !rem.empty()) {
      LocalFrac q = rem.back() * lead_inv;
      size_t off = rem.size() - d.c_.size();
      quo[off] = q;
      for (size_t i = 0; i < d.c_.size(); ++i) rem[off + i] = rem[off + i] - q * d.c_[i];
      while (!rem.empty() && rem.back().is_zero()) rem.pop_back();
    }
    return {UPoly(ring_, std::move(quo)), UPoly(ring_, std::move(rem))};
  }

  UPoly pow(long k) const {
    UPoly r = one(ring_), b = *this;
    while (k > 0) {
      if (k & 1) r = r * b;
      b = b * b;
      k >>= 1;
    }
    return r;
  }

  LocalMatrix eval_at(const LocalMatrix& M) const {
    size_t n = M.rows();
    LocalMatrix r(M.ring(), n, n);
    LocalMatrix power = LocalMatrix::identity(M.ring(), n);
    for (size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i].is_zero()) r = r + power * c_[i];
      if (i + 1 < c_.size()) power = power * M;
    }
    return r;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  LocalRing ring_;
  FracVec c_;
};

inline UPoly upoly_gcd(UPoly a, UPoly b) {
  while (!b.is_zero()) {
    UPoly r = a.divmod(b).second;
    a = b;
    b = r;
  }
  return a.monic();
}

/// s*a + t*b = gcd(a, b) (monic).
inline UPoly upoly_xgcd(const UPoly& a, const UPoly& b, UPoly& s, UPoly& t) {
  const LocalRing& R = a.ring();
  UPoly r0 = a, r1 = b;
  UPoly s0 = UPoly::one(R), s1 = UPoly::zero(R);
  UPoly t0 = UPoly::zero(R), t1 = UPoly::one(R);
  while (!r1.is_zero()) {
    auto [q, r2] = r0.divmod(r1);
    UPoly s2 = s0 - q * s1, t2 = t0 - q * t1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
    t0 = t1;
    t1 = t2;
  }
  if (r0.is_zero()) {
    s = UPoly::zero(R);
    t = UPoly::zero(R);
    return r0;
  }
  LocalFrac lead_inv = r0.coeffs().back().inverse();
  s = s0 * lead_inv;
  t = t0 * lead_inv;
  return r0 * lead_inv;
}

/// Minimal polynomial of a square matrix over the field (e = 1).
inline UPoly minimal_polynomial(const LocalMatrix& M) {
  const LocalRing& R = M.ring();
  size_t n = M.rows();
  size_t dim = n * n;
  std::vector<FracVec> flat_powers;
  LocalMatrix power = LocalMatrix::identity(R, n);
  for (size_t k = 0; k <= dim; ++k) {
    FracVec v(dim, LocalFrac::zero(R));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) v[i * n + j] = power.at(i, j);
    flat_powers.push_back(std::move(v));
    // Find dependence: does power^k lie in span of the previous ones?
    LocalMatrix A(R, dim, k);
    for (size_t c = 0; c < k; ++c)
      for (size_t r = 0; r < dim; ++r) A.at(r, c) = flat_powers[c][r];
    if (k > 0) {
      auto sol = field_solve(A, flat_powers[k]);
      if (sol) {
        FracVec coeffs(k + 1, LocalFrac::zero(R));
        for (size_t c = 0; c < k; ++c) coeffs[c] = -(*sol)[c];
        coeffs[k] = LocalFrac::one(R);
        return UPoly(R, std::move(coeffs));
      }
    }
    power = power * M;
  }
  throw std::logic_error("minimal_polynomial: no dependence found");
}

// ---------------------------------------------------------------------------
// Factorization over F_p for polynomials with constant coefficients.

namespace detail {

inline std::vector<Int> upoly_to_fp(const UPoly& f, const Int& p) {
  std::vector<Int> out;
  for (const auto& c : f.coeffs()) {
    Int num = c.num().constant_value();
    Int den = c.den().constant_value();
    out.push_back(mod_floor(num * mod_inverse(den, p), p));
  }
  return out;
}

inline UPoly fp_to_upoly(const std::vector<Int>& c, const LocalRing& R) {
  FracVec v;
  for (const auto& x : c) v.push_back(LocalFrac::constant(R, x));
  return UPoly(R, std::move(v));
}

}  // namespace detail

/// Factors a monic polynomial with F_p-constant coefficients into irreducible
/// powers, returned as pairwise-coprime primary parts f_i^{m_i}.
inline std::vector<UPoly> factor_primary_fp(const UPoly& f_in) {
  const LocalRing& R = f_in.ring();
  Int p = R.p;
  UPoly f = f_in.monic();
  std::vector<std::pair<std::vector<Int>, int>> factors;  // (irreducible, multiplicity)
  auto dense = detail::upoly_to_fp(f, p);

  auto divmod_fp = [&](const std::vector<Int>& a, const std::vector<Int>& b) {
    std::vector<Int> rem = a, quo(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, Int(0));
    Int lead_inv = mod_inverse(b.back(), p);
    while (rem.size() >= b.size() && !rem.empty()) {
      Int q = mod_floor(rem.back() * lead_inv, p);
      size_t off = rem.size() - b.size();
      quo[off] = q;
      for (size_t i = 0; i < b.size(); ++i) rem[off + i] = mod_floor(rem[off + i] - q * b[i], p);
      while (!rem.empty() && rem.back() == 0) rem.pop_back();
    }
    return std::make_pair(quo, rem);
  };

  // Trial division by monic polynomials of increasing degree; the smallest
  // divisor of the remaining cofactor is automatically irreducible.
  long deg = static_cast<long>(dense.size()) - 1;
  for (long d = 1; d <= deg && static_cast<long>(dense.size()) - 1 > 0; ++d) {
    bool retry = true;
    while (retry) {
      retry = false;
      Int count = int_pow(p, Int(d));
      for (Int idx = 0; idx < count; ++idx) {
        std::vector<Int> cand(d + 1, Int(0));
        Int rem = idx;
        for (long i = 0; i < d; ++i) {
          cand[i] = rem % p;
          rem /= p;
        }
        cand[d] = 1;
        auto [q, r] = divmod_fp(dense, cand);
        if (r.empty() && static_cast<long>(dense.size()) - 1 >= d) {
          int mult = 0;
          while (true) {
            auto [q2, r2] = divmod_fp(dense, cand);
            if (!r2.empty()) break;
            dense = q2;
            ++mult;
          }
          factors.emplace_back(cand, mult);
          retry = static_cast<long>(dense.size()) - 1 >= d;
          break;
        }
      }
    }
  }
  std::vector<UPoly> out;
  for (auto& [irr, mult] : factors) out.push_back(detail::fp_to_upoly(irr, R).pow(mult));
  if (out.empty()) out.push_back(UPoly::one(R));
  return out;
}

/// Pairwise-coprime primary decomposition of a monic minimal polynomial within
/// the supported factorization budget. Degree-one inputs and lambda-power
/// extraction never need a factorization; beyond that the coefficients must be
/// constants so the F_p machinery applies.
inline std::vector<UPoly> coprime_primary_factors(const UPoly& mu_in) {
  const LocalRing& R = mu_in.ring();
  UPoly mu = mu_in.monic();
  if (mu.degree() <= 1) return {mu};
  // lambda^a * g with g(0) != 0 splits without any factorization
  size_t a = 0;
  while (a < mu.coeffs().size() && mu.coeffs()[a].is_zero()) ++a;
  if (a > 0 && a < mu.coeffs().size() - 0 && static_cast<long>(a) < mu.degree()) {
    FracVec rest(mu.coeffs().begin() + a, mu.coeffs().end());
    UPoly g(R, std::move(rest));
    std::vector<UPoly> out = {UPoly::lambda(R).pow(static_cast<long>(a))};
    for (auto& q : coprime_primary_factors(g)) out.push_back(q);
    return out;
  }
  if (mu.has_constant_coeffs()) return factor_primary_fp(mu);
  throw FactorizationUnavailableError(
      "coprime_primary_factors: minimal polynomial has non-constant coefficients of degree >= 2");
}

}  // namespace sunit
