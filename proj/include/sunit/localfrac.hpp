#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/laurent.hpp"
#include "sunit/numeric.hpp"

namespace sunit {

struct NonUnitError : std::domain_error {
  explicit NonUnitError(const std::string& what) : std::domain_error(what) {}
};

/// The coefficient ring Z/p^e(X_1..X_n): fractions of Laurent polynomials
/// over Z/p^e with denominator not divisible by p.
struct LocalRing {
  Int p;
  int e;
  long nvars;

  LocalRing() : p(2), e(1), nvars(0) {}
  LocalRing(Int p_, int e_, long nvars_) : p(std::move(p_)), e(e_), nvars(nvars_) {
    if (p < 2 || e < 1 || nvars < 0) throw std::invalid_argument("LocalRing: bad parameters");
  }
  Int modulus() const { return int_pow(p, Int(e)); }
  bool operator==(const LocalRing& o) const { return p == o.p && e == o.e && nvars == o.nvars; }
  bool operator!=(const LocalRing& o) const { return !(*this == o); }
  LocalRing reduced(int new_e) const { return LocalRing(p, new_e, nvars); }
};

namespace detail {

// Dense univariate helpers over F_p used to keep e = 1 fractions reduced.
inline std::vector<Int> to_dense(const LaurentPoly& f) {
  std::vector<Int> c;
  for (const auto& [e, k] : f.terms()) {
    size_t d = static_cast<size_t>(e[0]);
    if (c.size() <= d) c.resize(d + 1, Int(0));
    c[d] = k;
  }
  while (!c.empty() && c.back() == 0) c.pop_back();
  return c;
}

inline LaurentPoly from_dense(const std::vector<Int>& c, const Int& modulus) {
  LaurentPoly f(1, modulus);
  for (size_t i = 0; i < c.size(); ++i) f.add_term({static_cast<long long>(i)}, c[i]);
  return f;
}

inline std::vector<Int> dense_rem(std::vector<Int> a, const std::vector<Int>& b, const Int& p) {
  Int lead_inv = mod_inverse(b.back(), p);
  while (a.size() >= b.size() && !a.empty()) {
    Int q = mod_floor(a.back() * lead_inv, p);
    size_t off = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[off + i] = mod_floor(a[off + i] - q * b[i], p);
    while (!a.empty() && a.back() == 0) a.pop_back();
  }
  return a;
}

inline std::vector<Int> dense_gcd(std::vector<Int> a, std::vector<Int> b, const Int& p) {
  while (!b.empty()) {
    auto r = dense_rem(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Int inv = mod_inverse(a.back(), p);
    for (auto& c : a) c = mod_floor(c * inv, p);
  }
  return a;
}

inline std::vector<Int> dense_divexact(std::vector<Int> a, const std::vector<Int>& b, const Int& p) {
  if (b.empty()) throw std::domain_error("dense_divexact: division by zero");
  std::vector<Int> q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, Int(0));
  Int lead_inv = mod_inverse(b.back(), p);
  while (a.size() >= b.size() && !a.empty()) {
    Int qc = mod_floor(a.back() * lead_inv, p);
    size_t off = a.size() - b.size();
    q[off] = qc;
    for (size_t i = 0; i < b.size(); ++i) a[off + i] = mod_floor(a[off + i] - qc * b[i], p);
    while (!a.empty() && a.back() == 0) a.pop_back();
  }
  if (!a.empty()) throw std::domain_error("dense_divexact: not divisible");
  return q;
}

}  // namespace detail

/// A fraction f/g over Z/p^e[X~ +-] with p not dividing g. Kept unreduced in
/// general (no gcd over Z/p^e); equality is decided by cross-multiplication.
/// Over e = 1 with one variable the representation is additionally reduced to
/// lowest terms, which keeps Gaussian elimination degrees under control.
class LocalFrac {
 public:
  LocalFrac() = default;
  LocalFrac(LocalRing ring, LaurentPoly num, LaurentPoly den)
      : ring_(std::move(ring)), num_(std::move(num)), den_(std::move(den)) {
    validate();
    normalize();
  }

  static LocalFrac of_poly(const LocalRing& ring, const LaurentPoly& f) {
    return LocalFrac(ring, f, LaurentPoly::constant(ring.nvars, 1, ring.modulus()));
  }
  static LocalFrac constant(const LocalRing& ring, const Int& c) {
    return of_poly(ring, LaurentPoly::constant(ring.nvars, c, ring.modulus()));
  }
  static LocalFrac zero(const LocalRing& ring) { return constant(ring, 0); }
  static LocalFrac one(const LocalRing& ring) { return constant(ring, 1); }
  static LocalFrac variable(const LocalRing& ring, long i) {
    return of_poly(ring, LaurentPoly::variable(ring.nvars, i, ring.modulus()));
  }

  const LocalRing& ring() const { return ring_; }
  const LaurentPoly& num() const { return num_; }
  const LaurentPoly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return num_ == den_; }

  LocalFrac operator+(const LocalFrac& o) const {
    check(o);
    if (den_ == o.den_) return LocalFrac(ring_, num_ + o.num_, den_);
    return LocalFrac(ring_, num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  LocalFrac operator-(const LocalFrac& o) const {
    check(o);
    if (den_ == o.den_) return LocalFrac(ring_, num_ - o.num_, den_);
    return LocalFrac(ring_, num_ * o.den_ - o.num_ * den_, den_ * o.den_);
  }
  LocalFrac operator-() const { return LocalFrac(ring_, -num_, den_); }
  LocalFrac operator*(const LocalFrac& o) const {
    check(o);
    if (num_.is_zero() || o.num_.is_zero()) return zero(ring_);
    return LocalFrac(ring_, num_ * o.num_, den_ * o.den_);
  }

  /// Exact inverse; requires p not dividing the numerator.
  LocalFrac inverse() const {
    if (num_.valuation(ring_.p, ring_.e) > 0)
      throw NonUnitError("LocalFrac: numerator divisible by p, not a unit");
    return LocalFrac(ring_, den_, num_);
  }
  LocalFrac operator/(const LocalFrac& o) const { return *this * o.inverse(); }

  bool is_unit() const { return !num_.is_zero() && num_.valuation(ring_.p, ring_.e) == 0; }

  /// Equality by cross-multiplication.
  bool operator==(const LocalFrac& o) const {
    check(o);
    return num_ * o.den_ == o.num_ * den_;
  }
  bool operator!=(const LocalFrac& o) const { return !(*this == o); }
  // Structural order on the normalized representation (for canonical maps).
  bool operator<(const LocalFrac& o) const {
    if (num_ != o.num_) return num_ < o.num_;
    return den_ < o.den_;
  }

  int valuation() const { return num_.valuation(ring_.p, ring_.e); }
  // A request of at least e means "is zero" (p^e = 0 in the ring).
  bool divisible_by_p_power(int a) const { return valuation() >= std::min(a, ring_.e); }
  LocalFrac divide_by_p_power(int a) const {
    if (a == 0) return *this;
    return LocalFrac(ring_, num_.divide_coeffs(int_pow(ring_.p, Int(a))), den_);
  }
  LocalFrac times_p_power(int a) const {
    return LocalFrac(ring_, num_ * int_pow(ring_.p, Int(a)), den_);
  }

  /// Image in Z/p^a(X~) for a <= e.
  LocalFrac reduce_to(int a) const {
    LocalRing r2 = ring_.reduced(a);
    Int m = r2.modulus();
    return LocalFrac(r2, num_.with_modulus(m), den_.with_modulus(m));
  }
  /// Canonical lift to Z/p^a(X~) for a >= e (coefficients read as-is).
  LocalFrac lift_to(int a) const {
    LocalRing r2 = ring_.reduced(a);
    Int m = r2.modulus();
    return LocalFrac(r2, num_.with_modulus(m), den_.with_modulus(m));
  }

  LocalFrac pow(const Int& k) const {
    if (k < 0) return inverse().pow(-k);
    LocalFrac r = one(ring_), b = *this;
    Int e = k;
    while (e > 0) {
      if ((e & 1) != 0) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  std::string str() const {
    if (den_.is_one()) return num_.str(false);
    return "(" + num_.str(false) + ")/(" + den_.str(false) + ")";
  }

 private:
  void validate() const {
    Int m = ring_.modulus();
    if (num_.modulus() != m || den_.modulus() != m) throw std::invalid_argument("LocalFrac: modulus mismatch");
    if (num_.nvars() != ring_.nvars || den_.nvars() != ring_.nvars)
      throw std::invalid_argument("LocalFrac: nvars mismatch");
    if (den_.is_zero() || den_.valuation(ring_.p, 1) > 0)
      throw NonUnitError("LocalFrac: denominator divisible by p");
  }
  void check(const LocalFrac& o) const {
    if (ring_ != o.ring_) throw std::invalid_argument("LocalFrac: ring mismatch");
  }

  void normalize() {
    if (num_.is_zero()) {
      den_ = LaurentPoly::constant(ring_.nvars, 1, ring_.modulus());
      return;
    }
    // Pull monomial content out of the denominator (monomials are units).
    ExpVec dshift;
    LaurentPoly d2 = den_.shift_normalized(&dshift);
    bool shifted = false;
    for (long i = 0; i < ring_.nvars; ++i) shifted |= (dshift[i] != 0);
    if (shifted) {
      ExpVec neg(ring_.nvars);
      for (long i = 0; i < ring_.nvars; ++i) neg[i] = -dshift[i];
      num_ = num_ * LaurentPoly::monomial(ring_.nvars, neg, 1, ring_.modulus());
      den_ = d2;
    }
    if (ring_.e == 1 && ring_.nvars == 1) {
      auto a = detail::to_dense(num_.shift_normalized());
      ExpVec nshift;
      LaurentPoly n2 = num_.shift_normalized(&nshift);
      a = detail::to_dense(n2);
      auto b = detail::to_dense(den_);
      auto g = detail::dense_gcd(a, b, ring_.p);
      if (g.size() > 1) {
        a = detail::dense_divexact(a, g, ring_.p);
        b = detail::dense_divexact(b, g, ring_.p);
      }
      // Monic denominator.
      Int inv = mod_inverse(b.back(), ring_.p);
      for (auto& c : a) c = mod_floor(c * inv, ring_.p);
      for (auto& c : b) c = mod_floor(c * inv, ring_.p);
      num_ = detail::from_dense(a, ring_.modulus()) *
             LaurentPoly::monomial(1, nshift, 1, ring_.modulus());
      den_ = detail::from_dense(b, ring_.modulus());
      return;
    }
    // Scale by a constant so the first unit coefficient of the denominator is 1.
    for (const auto& [e, c] : den_.terms()) {
      if (c % ring_.p != 0) {
        if (c != 1) {
          Int inv = mod_inverse(c, ring_.modulus());
          num_ = num_ * inv;
          den_ = den_ * inv;
        }
        break;
      }
    }
  }

  LocalRing ring_;
  LaurentPoly num_;
  LaurentPoly den_;
};

/// Parses `poly`, `(poly)/(poly)`, or `poly/poly` for monomial denominators.
inline LocalFrac parse_localfrac(const LocalRing& ring, const std::string& text) {
  auto strip = [](std::string s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return std::string();
    return s.substr(a, b - a + 1);
  };
  std::string s = strip(text);
  Int m = ring.modulus();
  if (!s.empty() && s.front() == '(') {
    int depth = 0;
    size_t close = std::string::npos;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '(') ++depth;
      if (s[i] == ')' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close != std::string::npos) {
      std::string rest = strip(s.substr(close + 1));
      if (!rest.empty() && rest.front() == '/') {
        std::string dpart = strip(rest.substr(1));
        if (!dpart.empty() && dpart.front() == '(' && dpart.back() == ')')
          dpart = dpart.substr(1, dpart.size() - 2);
        LaurentPoly n = parse_laurent(s.substr(1, close - 1), ring.nvars, m);
        LaurentPoly d = parse_laurent(dpart, ring.nvars, m);
        return LocalFrac(ring, n, d);
      }
    }
  }
  return LocalFrac::of_poly(ring, parse_laurent(s, ring.nvars, m));
}

}  // namespace sunit
