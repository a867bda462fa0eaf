#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/numeric.hpp"

namespace sunit {

using ExpVec = std::vector<long long>;

/// Multivariate Laurent polynomial over Z/T, stored as a sorted term map so
/// that equality is structural. Zero coefficients are never stored.
class LaurentPoly {
 public:
  LaurentPoly() : nvars_(0), modulus_(2) {}
  LaurentPoly(long nvars, Int modulus) : nvars_(nvars), modulus_(std::move(modulus)) {
    if (modulus_ <= 1) throw std::invalid_argument("LaurentPoly: modulus must be > 1");
  }

  static LaurentPoly constant(long nvars, const Int& c, const Int& modulus) {
    LaurentPoly f(nvars, modulus);
    f.add_term(ExpVec(nvars, 0), c);
    return f;
  }
  static LaurentPoly monomial(long nvars, const ExpVec& e, const Int& c, const Int& modulus) {
    LaurentPoly f(nvars, modulus);
    f.add_term(e, c);
    return f;
  }
  // The variable X_{i+1} (0-based index i).
  static LaurentPoly variable(long nvars, long i, const Int& modulus) {
    ExpVec e(nvars, 0);
    e.at(i) = 1;
    return monomial(nvars, e, 1, modulus);
  }

  long nvars() const { return nvars_; }
  const Int& modulus() const { return modulus_; }
  const std::map<ExpVec, Int>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && terms_.begin()->first == ExpVec(nvars_, 0);
  }
  Int constant_value() const {
    if (terms_.empty()) return 0;
    auto it = terms_.find(ExpVec(nvars_, 0));
    return it == terms_.end() ? Int(0) : it->second;
  }
  bool is_monomial() const { return terms_.size() == 1; }
  bool is_one() const { return is_constant() && constant_value() == 1; }

  void add_term(const ExpVec& e, const Int& c) {
    if (static_cast<long>(e.size()) != nvars_) throw std::invalid_argument("LaurentPoly: bad exponent arity");
    Int v = mod_floor(c, modulus_);
    if (v == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, v);
    } else {
      it->second = mod_floor(it->second + v, modulus_);
      if (it->second == 0) terms_.erase(it);
    }
  }

  LaurentPoly operator+(const LaurentPoly& o) const {
    check(o);
    LaurentPoly r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, c);
    return r;
  }
  LaurentPoly operator-(const LaurentPoly& o) const {
    check(o);
    LaurentPoly r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, modulus_ - c);
    return r;
  }
  LaurentPoly operator-() const {
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e, c] : terms_) r.add_term(e, modulus_ - c);
    return r;
  }
  LaurentPoly operator*(const LaurentPoly& o) const {
    check(o);
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e1, c1] : terms_) {
      for (const auto& [e2, c2] : o.terms_) {
        ExpVec e(nvars_);
        for (long i = 0; i < nvars_; ++i) e[i] = e1[i] + e2[i];
        r.add_term(e, c1 * c2);
      }
    }
    return r;
  }
  LaurentPoly operator*(const Int& c) const {
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e, k] : terms_) r.add_term(e, k * c);
    return r;
  }

  bool operator==(const LaurentPoly& o) const {
    return nvars_ == o.nvars_ && modulus_ == o.modulus_ && terms_ == o.terms_;
  }
  bool operator!=(const LaurentPoly& o) const { return !(*this == o); }
  bool operator<(const LaurentPoly& o) const {  // arbitrary total order for canonical containers
    if (nvars_ != o.nvars_) return nvars_ < o.nvars_;
    if (modulus_ != o.modulus_) return modulus_ < o.modulus_;
    return terms_ < o.terms_;
  }

  // Nonnegative powers for arbitrary polynomials; negative powers only for
  // single-term units (monomials with invertible coefficient).
  LaurentPoly pow(Int e) const {
    if (e < 0) {
      if (!is_monomial()) throw std::domain_error("LaurentPoly::pow: negative power of a non-monomial");
      const auto& [ev, c] = *terms_.begin();
      ExpVec inv_e(nvars_);
      for (long i = 0; i < nvars_; ++i) inv_e[i] = -ev[i];
      LaurentPoly m = monomial(nvars_, inv_e, mod_inverse(c, modulus_), modulus_);
      return m.pow(-e);
    }
    LaurentPoly r = constant(nvars_, 1, modulus_);
    LaurentPoly b = *this;
    while (e > 0) {
      if ((e & 1) != 0) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  /// Substitute every variable by its p^k-th power (exponent vectors scale by p^k).
  LaurentPoly frobenius_substitute(const Int& p, long k) const {
    if (k < 0) throw std::invalid_argument("frobenius_substitute: k must be >= 0");
    Int q = int_pow(p, Int(k));
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e, c] : terms_) {
      ExpVec e2(nvars_);
      for (long i = 0; i < nvars_; ++i) e2[i] = static_cast<long long>(Int(Int(e[i]) * q));
      r.add_term(e2, c);
    }
    return r;
  }

  // Smallest p-valuation over the coefficients, capped at `cap`.
  int valuation(const Int& p, int cap) const {
    int v = cap;
    for (const auto& [e, c] : terms_) v = std::min(v, p_valuation(c, p, cap));
    return v;
  }
  bool divisible_by(const Int& q) const {
    for (const auto& [e, c] : terms_)
      if (c % q != 0) return false;
    return true;
  }
  // Exact division of every coefficient by q (caller guarantees divisibility).
  LaurentPoly divide_coeffs(const Int& q) const {
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e, c] : terms_) {
      if (c % q != 0) throw std::domain_error("divide_coeffs: not divisible");
      r.add_term(e, c / q);
    }
    return r;
  }
  // Coefficients reinterpreted modulo new_modulus.
  LaurentPoly with_modulus(const Int& new_modulus) const {
    LaurentPoly r(nvars_, new_modulus);
    for (const auto& [e, c] : terms_) r.add_term(e, c);
    return r;
  }

  // Max per-variable exponent spread; total degree of the shifted polynomial.
  long long degree_span() const {
    if (terms_.empty()) return 0;
    long long total = 0;
    for (long i = 0; i < nvars_; ++i) {
      long long lo = terms_.begin()->first[i], hi = lo;
      for (const auto& [e, c] : terms_) {
        lo = std::min(lo, e[i]);
        hi = std::max(hi, e[i]);
      }
      total += hi - lo;
    }
    return total;
  }

  // Factor out the minimal exponent per variable: *this = X^shift * result,
  // result has nonnegative exponents with zero minimum in each variable.
  LaurentPoly shift_normalized(ExpVec* shift = nullptr) const {
    ExpVec mins(nvars_, 0);
    if (!terms_.empty()) {
      mins = terms_.begin()->first;
      for (const auto& [e, c] : terms_)
        for (long i = 0; i < nvars_; ++i) mins[i] = std::min(mins[i], e[i]);
    }
    LaurentPoly r(nvars_, modulus_);
    for (const auto& [e, c] : terms_) {
      ExpVec e2(nvars_);
      for (long i = 0; i < nvars_; ++i) e2[i] = e[i] - mins[i];
      r.add_term(e2, c);
    }
    if (shift) *shift = mins;
    return r;
  }

  std::string str(bool with_modulus_suffix = true) const;

 private:
  void check(const LaurentPoly& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("LaurentPoly: nvars mismatch");
    if (modulus_ != o.modulus_) throw std::invalid_argument("LaurentPoly: modulus mismatch");
  }

  long nvars_;
  Int modulus_;
  std::map<ExpVec, Int> terms_;
};

/// h^{p^e} computed as h^{p^{e-1}} with variables substituted by their p-th
/// powers. Agrees with direct expansion of h^{p^e}.
inline LaurentPoly reduced_p_power(const LaurentPoly& h, const Int& p, int e) {
  if (e < 1) throw std::invalid_argument("reduced_p_power: e must be >= 1");
  return h.pow(int_pow(p, Int(e - 1))).frobenius_substitute(p, 1);
}

namespace detail {

// Membership of f in the ideal generated by `gens`, restricted to generators
// that are either constants or substitution rules X_i - q (q free of X_i).
// Returns false only when membership provably fails within this fragment;
// throws when a generator falls outside the fragment.
inline bool ideal_membership_restricted(LaurentPoly f, std::vector<LaurentPoly> gens) {
  std::vector<Int> constants;
  for (const auto& g : gens) {
    if (g.is_constant()) {
      if (!g.is_zero()) constants.push_back(g.constant_value());
      continue;
    }
    // Substitution rule: X_i - q with q not involving X_i and f polynomial in X_i.
    long var = -1;
    for (const auto& [e, c] : g.terms()) {
      for (long i = 0; i < g.nvars(); ++i) {
        if (e[i] == 1 && c == 1) {
          ExpVec unit(g.nvars(), 0);
          unit[i] = 1;
          if (e == unit) var = i;
        }
      }
    }
    if (var < 0) throw std::domain_error("ideal membership: generator outside the supported fragment");
    LaurentPoly q = LaurentPoly::variable(g.nvars(), var, g.modulus()) - g;  // X_var = q
    for (const auto& [e, c] : q.terms())
      if (e[var] != 0) throw std::domain_error("ideal membership: substitution rule is self-referential");
    // Substitute X_var := q in f (requires nonnegative powers of X_var).
    LaurentPoly nf(f.nvars(), f.modulus());
    for (const auto& [e, c] : f.terms()) {
      if (e[var] < 0) throw std::domain_error("ideal membership: negative power under substitution");
      ExpVec e2 = e;
      e2[var] = 0;
      nf = nf + LaurentPoly::monomial(f.nvars(), e2, c, f.modulus()) * q.pow(e[var]);
    }
    f = nf;
  }
  if (f.is_zero()) return true;
  if (constants.empty()) return false;
  Int g = 0;
  for (const auto& c : constants) g = int_gcd(g, c);
  g = int_gcd(g, f.modulus());
  return f.divisible_by(g);
}

}  // namespace detail

/// Given f = g mod <P> with <P>^t = 0, returns f^{p^{t-1}} (which then equals
/// g^{p^{t-1}}). The membership precondition is checked over the supported
/// ideal fragment.
inline LaurentPoly frobenius_congruence_power(const LaurentPoly& f, const LaurentPoly& g,
                                              const std::vector<LaurentPoly>& ideal_gens, const Int& p,
                                              int t) {
  if (t < 1) throw std::invalid_argument("frobenius_congruence_power: t must be >= 1");
  if (!detail::ideal_membership_restricted(f - g, ideal_gens))
    throw std::domain_error("frobenius_congruence_power: f - g not in the ideal");
  return f.pow(int_pow(p, Int(t - 1)));
}

// ---------------------------------------------------------------------------
// Text syntax: `3*X1^2*X2^-1 + 2 (mod 4)`.

inline std::string LaurentPoly::str(bool with_modulus_suffix) const {
  std::ostringstream os;
  if (terms_.empty()) {
    os << "0";
  } else {
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      bool has_var = false;
      for (long i = 0; i < nvars_; ++i)
        if (e[i] != 0) has_var = true;
      if (!has_var) {
        os << c.str();
        continue;
      }
      bool printed = false;
      if (c != 1) {
        os << c.str();
        printed = true;
      }
      for (long i = 0; i < nvars_; ++i) {
        if (e[i] == 0) continue;
        if (printed) os << "*";
        os << "X" << (i + 1);
        if (e[i] != 1) os << "^" << e[i];
        printed = true;
      }
    }
  }
  if (with_modulus_suffix) os << " (mod " << modulus_.str() << ")";
  return os.str();
}

namespace detail {

struct PolyLexer {
  std::string s;
  size_t pos = 0;
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  Int integer() {
    skip_ws();
    bool neg = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) neg = (s[pos++] == '-');
    skip_ws();
    if (pos >= s.size() || !isdigit(static_cast<unsigned char>(s[pos])))
      throw std::invalid_argument("poly parse: expected integer at '" + s.substr(pos) + "'");
    std::string digits;
    while (pos < s.size() && isdigit(static_cast<unsigned char>(s[pos]))) digits += s[pos++];
    Int v(digits);
    return neg ? Int(-v) : v;
  }
};

}  // namespace detail

/// Parses the text syntax. When nvars < 0 the arity is inferred from the
/// highest variable index mentioned; the modulus must either be present as a
/// `(mod T)` suffix or supplied by the caller.
inline LaurentPoly parse_laurent(const std::string& text, long nvars = -1, Int modulus = 0) {
  std::string body = text;
  auto mpos = body.rfind("(mod");
  if (mpos != std::string::npos) {
    std::string mstr = body.substr(mpos + 4);
    auto close = mstr.find(')');
    if (close == std::string::npos) throw std::invalid_argument("poly parse: unterminated (mod ...)");
    std::string digits;
    for (char c : mstr.substr(0, close))
      if (!isspace(static_cast<unsigned char>(c))) digits += c;
    modulus = Int(digits);
    body = body.substr(0, mpos);
  }
  if (modulus <= 1) throw std::invalid_argument("poly parse: missing modulus");

  struct Term {
    Int coeff;
    std::vector<std::pair<long, long long>> vars;
  };
  std::vector<Term> parsed;
  long max_var = 0;

  detail::PolyLexer lx{body};
  bool expect_term = true;
  Int sign = 1;
  while (true) {
    lx.skip_ws();
    if (lx.pos >= lx.s.size()) break;
    char c = lx.peek();
    if (c == '+') {
      lx.eat('+');
      sign = 1;
      expect_term = true;
      continue;
    }
    if (c == '-') {
      lx.eat('-');
      sign = -1;
      expect_term = true;
      continue;
    }
    if (!expect_term) throw std::invalid_argument("poly parse: unexpected token near '" + lx.s.substr(lx.pos) + "'");
    Term t;
    t.coeff = sign;
    bool have_factor = false;
    while (true) {
      lx.skip_ws();
      if (lx.pos < lx.s.size() && isdigit(static_cast<unsigned char>(lx.s[lx.pos]))) {
        t.coeff *= lx.integer();
        have_factor = true;
      } else if (lx.pos < lx.s.size() && (lx.s[lx.pos] == 'X' || lx.s[lx.pos] == 'x')) {
        ++lx.pos;
        long idx = 1;
        if (lx.pos < lx.s.size() && isdigit(static_cast<unsigned char>(lx.s[lx.pos]))) {
          idx = static_cast<long>(lx.integer());
        }
        long long ex = 1;
        if (lx.eat('^')) ex = static_cast<long long>(lx.integer());
        t.vars.emplace_back(idx - 1, ex);
        max_var = std::max(max_var, idx);
        have_factor = true;
      } else {
        break;
      }
      if (!lx.eat('*')) break;
    }
    if (!have_factor) throw std::invalid_argument("poly parse: empty term");
    parsed.push_back(std::move(t));
    expect_term = false;
    sign = 1;
  }

  if (nvars < 0) nvars = max_var;
  LaurentPoly f(nvars, modulus);
  for (const auto& t : parsed) {
    ExpVec e(nvars, 0);
    for (auto [i, ex] : t.vars) {
      if (i >= nvars) throw std::invalid_argument("poly parse: variable index out of range");
      e[i] += ex;
    }
    f.add_term(e, t.coeff);
  }
  return f;
}

}  // namespace sunit
