#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sunit {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Int int_pow(Int base, Int exp) {
  if (exp < 0) throw std::invalid_argument("int_pow: negative exponent");
  Int r = 1;
  while (exp > 0) {
    if ((exp & 1) != 0) r *= base;
    base *= base;
    exp >>= 1;
  }
  return r;
}

inline Int int_pow(long base, long exp) { return int_pow(Int(base), Int(exp)); }

// Euclidean mod with result in [0, m).
inline Int mod_floor(const Int& a, const Int& m) {
  Int r = a % m;
  if (r < 0) r += m;
  return r;
}

inline Int int_gcd(Int a, Int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline Int int_lcm(const Int& a, const Int& b) {
  if (a == 0 || b == 0) return 0;
  Int g = int_gcd(a, b);
  Int l = (a / g) * b;
  return l < 0 ? -l : l;
}

// Extended gcd: returns g and x, y with a*x + b*y = g >= 0.
inline Int ext_gcd(const Int& a, const Int& b, Int& x, Int& y) {
  if (b == 0) {
    if (a < 0) {
      x = -1;
      y = 0;
      return -a;
    }
    x = 1;
    y = 0;
    return a;
  }
  Int x1, y1;
  Int g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

// Inverse of a modulo m (m > 1), throws if not coprime.
inline Int mod_inverse(const Int& a, const Int& m) {
  Int x, y;
  Int g = ext_gcd(mod_floor(a, m), m, x, y);
  if (g != 1) throw std::domain_error("mod_inverse: not invertible");
  return mod_floor(x, m);
}

// Largest v with p^v | a; returns cap for a == 0.
inline int p_valuation(const Int& a, const Int& p, int cap) {
  if (a == 0) return cap;
  Int x = a;
  int v = 0;
  while (v < cap && x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

inline std::string to_string(const Int& x) { return x.str(); }

inline std::string to_string(const Rat& x) {
  if (rat_den(x) == 1) return rat_num(x).str();
  return rat_num(x).str() + "/" + rat_den(x).str();
}

}  // namespace sunit
