#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "sunit/laurent.hpp"
#include "sunit/localfrac.hpp"
#include "sunit/modint.hpp"

using namespace sunit;

namespace {

LaurentPoly random_poly(std::mt19937& rng, long nvars, const Int& modulus, int max_deg, int max_terms,
                        bool laurent = false) {
  std::uniform_int_distribution<int> nterms(0, max_terms);
  std::uniform_int_distribution<int> deg(laurent ? -max_deg : 0, max_deg);
  std::uniform_int_distribution<long long> coeff(0, 1000);
  LaurentPoly f(nvars, modulus);
  int k = nterms(rng);
  for (int t = 0; t < k; ++t) {
    ExpVec e(nvars);
    for (long i = 0; i < nvars; ++i) e[i] = deg(rng);
    f.add_term(e, Int(coeff(rng)));
  }
  return f;
}

}  // namespace

TEST_CASE("ModInt basics") {
  ModInt a(7, 4);
  REQUIRE(a.value() == 3);
  REQUIRE((a * a).value() == 1);
  REQUIRE((a + ModInt(1, 4)).value() == 0);
  REQUIRE(ModInt(3, 4).inverse().value() == 3);
  REQUIRE_THROWS_AS(ModInt(2, 4).inverse(), std::domain_error);
}

TEST_CASE("laurent arithmetic worked examples") {
  // (X+1)^2 over Z/4 = X^2 + 2X + 1
  LaurentPoly xp1 = parse_laurent("X1 + 1", 1, 4);
  REQUIRE(xp1.pow(2) == parse_laurent("X1^2 + 2*X1 + 1", 1, 4));
  // (X^2+2X+1)^2 = X^4 + 2X^2 + 1 over Z/4
  REQUIRE(xp1.pow(2).pow(2) == parse_laurent("X1^4 + 2*X1^2 + 1", 1, 4));
  // f * 1 = f
  LaurentPoly one = LaurentPoly::constant(1, 1, 4);
  REQUIRE(xp1 * one == xp1);
}

TEST_CASE("laurent pow of non-monomial with negative exponent fails") {
  LaurentPoly xp1 = parse_laurent("X1 + 1", 1, 4);
  REQUIRE_THROWS_AS(xp1.pow(-1), std::domain_error);
  // single-term units invert fine
  LaurentPoly m = parse_laurent("3*X1^2", 1, 4);
  REQUIRE(m.pow(-1) * m == LaurentPoly::constant(1, 1, 4));
}

TEST_CASE("laurent modulus mismatch is an error") {
  LaurentPoly a = parse_laurent("X1", 1, 4);
  LaurentPoly b = parse_laurent("X1", 1, 9);
  REQUIRE_THROWS_AS(a + b, std::invalid_argument);
}

TEST_CASE("frobenius_substitute examples") {
  // f = X+1, p=2, k=1 -> X^2+1
  LaurentPoly f = parse_laurent("X1 + 1", 1, 2);
  REQUIRE(f.frobenius_substitute(2, 1) == parse_laurent("X1^2 + 1", 1, 2));
  // f = X1*X2^-1, p=3, k=1 -> X1^3*X2^-3
  LaurentPoly g = parse_laurent("X1*X2^-1", 2, 3);
  REQUIRE(g.frobenius_substitute(3, 1) == parse_laurent("X1^3*X2^-3", 2, 3));
  // constants unchanged
  LaurentPoly c = parse_laurent("2", 1, 9);
  REQUIRE(c.frobenius_substitute(3, 2) == c);
}

TEST_CASE("frobenius_substitute is multiplicative") {
  std::mt19937 rng(12345);
  for (int iter = 0; iter < 50; ++iter) {
    Int p = (iter % 2 == 0) ? 2 : 3;
    int e = 1 + iter % 3;
    Int T = int_pow(p, Int(e));
    LaurentPoly f = random_poly(rng, 2, T, 3, 4, true);
    LaurentPoly g = random_poly(rng, 2, T, 3, 4, true);
    REQUIRE((f * g).frobenius_substitute(p, 1) ==
            f.frobenius_substitute(p, 1) * g.frobenius_substitute(p, 1));
  }
}

TEST_CASE("reduced_p_power examples") {
  // h = Y+1, p=2, e=2: (Y^2+1)^2 = Y^4+2Y^2+1, equals (Y+1)^4 mod 4
  LaurentPoly h = parse_laurent("X1 + 1", 1, 4);
  LaurentPoly r = reduced_p_power(h, 2, 2);
  REQUIRE(r == parse_laurent("X1^4 + 2*X1^2 + 1", 1, 4));
  REQUIRE(r == h.pow(4));
  // h = Y: Y^{p^e}
  LaurentPoly y = parse_laurent("X1", 1, 27);
  REQUIRE(reduced_p_power(y, 3, 3) == y.pow(27));
  // h constant: c^{p^e}
  LaurentPoly c = parse_laurent("2", 1, 27);
  REQUIRE(reduced_p_power(c, 3, 3) == c.pow(27));
}

TEST_CASE("reduced_p_power equals brute-force expansion") {
  std::mt19937 rng(999);
  for (Int p : {Int(2), Int(3)}) {
    for (int e = 1; e <= 3; ++e) {
      Int T = int_pow(p, Int(e));
      for (int iter = 0; iter < 25; ++iter) {
        LaurentPoly h = random_poly(rng, 1, T, 6, 5);
        REQUIRE(reduced_p_power(h, p, e) == h.pow(int_pow(p, Int(e))));
      }
    }
  }
}

TEST_CASE("frobenius_congruence_power examples") {
  // f = X+1, g = X+3, P = {2}, t = 2 in Z/4[X]: squares agree
  LaurentPoly f = parse_laurent("X1 + 1", 1, 4);
  LaurentPoly g = parse_laurent("X1 + 3", 1, 4);
  std::vector<LaurentPoly> P = {LaurentPoly::constant(1, 2, 4)};
  LaurentPoly fp = frobenius_congruence_power(f, g, P, 2, 2);
  REQUIRE(fp == f.pow(2));
  REQUIRE(fp == g.pow(2));

  // f = g: trivially equal powers, any t
  REQUIRE(frobenius_congruence_power(f, f, {}, 2, 1) == f);

  // t = 1 requires f = g (P = 0)
  REQUIRE_THROWS_AS(frobenius_congruence_power(f, g, {}, 2, 1), std::domain_error);

  // membership failure is reported
  LaurentPoly h = parse_laurent("X1", 1, 4);
  REQUIRE_THROWS_AS(frobenius_congruence_power(f, h, P, 2, 2), std::domain_error);
}

TEST_CASE("frobenius_congruence_power property on random polynomials") {
  std::mt19937 rng(777);
  for (Int p : {Int(2), Int(3)}) {
    for (int e = 1; e <= 3; ++e) {
      Int T = int_pow(p, Int(e));
      std::vector<LaurentPoly> P = {LaurentPoly::constant(1, p, T)};
      for (int iter = 0; iter < 28; ++iter) {
        LaurentPoly f = random_poly(rng, 1, T, 4, 4);
        LaurentPoly d = random_poly(rng, 1, T, 4, 3) * p;  // f - g in <p>
        LaurentPoly g = f - d;
        // <p>^e = 0, so t = e works
        LaurentPoly fp = frobenius_congruence_power(f, g, P, p, e);
        REQUIRE(fp == g.pow(int_pow(p, Int(e - 1))));
      }
    }
  }
}

TEST_CASE("localfrac invert examples") {
  LocalRing R(2, 2, 1);  // Z/4(X)
  LocalFrac x = parse_localfrac(R, "1 + 2*X1");
  LocalFrac inv = x.inverse();
  REQUIRE(inv * x == LocalFrac::one(R));
  REQUIRE(inv == parse_localfrac(R, "1 + 2*X1"));  // (1+2X)^-1 = 1-2X = 1+2X mod 4
  REQUIRE(LocalFrac::one(R).inverse() == LocalFrac::one(R));
  REQUIRE_THROWS_AS(parse_localfrac(R, "2").inverse(), NonUnitError);
}

TEST_CASE("localfrac invert on 200 random unit fractions") {
  std::mt19937 rng(4242);
  int count = 0;
  while (count < 200) {
    Int p = (count % 2 == 0) ? 2 : 3;
    int e = 1 + count % 3;
    LocalRing R(p, e, 1);
    Int T = R.modulus();
    LaurentPoly n = random_poly(rng, 1, T, 4, 4, true);
    LaurentPoly d = random_poly(rng, 1, T, 4, 4, true);
    if (n.is_zero() || n.valuation(p, e) > 0) continue;
    if (d.is_zero() || d.valuation(p, 1) > 0) continue;
    LocalFrac x(R, n, d);
    REQUIRE(x.inverse() * x == LocalFrac::one(R));
    ++count;
  }
}

TEST_CASE("localfrac denominators divisible by p are rejected") {
  LocalRing R(2, 2, 1);
  REQUIRE_THROWS_AS(LocalFrac(R, parse_laurent("1", 1, 4), parse_laurent("2*X1", 1, 4)), NonUnitError);
}

TEST_CASE("localfrac cross-multiplication equality") {
  LocalRing R(2, 2, 1);
  LocalFrac a = parse_localfrac(R, "(X1^2 + 3*X1)/(X1 + 1)");
  LocalFrac b = parse_localfrac(R, "(X1^3 + 3*X1^2)/(X1^2 + X1)");
  REQUIRE(a == b);
  REQUIRE(a - b == LocalFrac::zero(R));
  REQUIRE(a != a + LocalFrac::one(R));
}

TEST_CASE("laurent equality is canonical") {
  std::mt19937 rng(31337);
  for (int iter = 0; iter < 40; ++iter) {
    LaurentPoly f = random_poly(rng, 2, 9, 3, 5, true);
    LaurentPoly g = random_poly(rng, 2, 9, 3, 5, true);
    bool canonical_equal = (f.terms() == g.terms());
    REQUIRE(((f - g).is_zero()) == canonical_equal);
  }
}

TEST_CASE("polynomial text syntax round-trips") {
  std::vector<std::string> cases = {
      "3*X1^2*X2^-1 + 2 (mod 4)",
      "0 (mod 9)",
      "X1 (mod 2)",
      "2*X1^-3 + X2^5 + 7 (mod 9)",
  };
  for (const auto& s : cases) {
    LaurentPoly f = parse_laurent(s, 2);
    REQUIRE(parse_laurent(f.str(), 2) == f);
  }
  std::mt19937 rng(2024);
  for (int iter = 0; iter < 60; ++iter) {
    LaurentPoly f = random_poly(rng, 2, 8, 4, 5, true);
    REQUIRE(parse_laurent(f.str(), 2) == f);
  }
  // printer emits the documented shape
  REQUIRE(parse_laurent("3*X1^2*X2^-1 + 2 (mod 4)", 2).str() == "2 + 3*X1^2*X2^-1 (mod 4)");
}
