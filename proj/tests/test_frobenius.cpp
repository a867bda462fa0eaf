#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "sunit/frobenius.hpp"

using namespace sunit;

namespace {

LaurentPoly random_poly(std::mt19937& rng, const LocalRing& R, int max_deg, bool laurent = false) {
  std::uniform_int_distribution<long long> coeff(0, 100);
  std::uniform_int_distribution<int> deg(laurent ? -max_deg : 0, max_deg);
  LaurentPoly f(R.nvars, R.modulus());
  for (int t = 0; t < 3; ++t) {
    ExpVec e(R.nvars, 0);
    for (long i = 0; i < R.nvars; ++i) e[i] = deg(rng);
    f.add_term(e, Int(coeff(rng)));
  }
  return f;
}

LocalFrac random_frac(std::mt19937& rng, const LocalRing& R, int max_deg = 3) {
  LaurentPoly n = random_poly(rng, R, max_deg, true);
  LaurentPoly d(R.nvars, R.modulus());
  do {
    d = random_poly(rng, R, max_deg);
  } while (d.is_zero() || d.valuation(R.p, 1) > 0);
  return LocalFrac(R, n, d);
}

LocalMatrix random_matrix(std::mt19937& rng, const LocalRing& R, size_t n, size_t m) {
  LocalMatrix M(R, n, m);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) M.at(i, j) = random_frac(rng, R, 2);
  return M;
}

LocalMatrix mult_by(const LocalRing& R, const LocalFrac& f) { return LocalMatrix::scalar(R, 1, f); }

}  // namespace

TEST_CASE("phi on scalars: worked examples") {
  LocalRing R(2, 1, 1);  // F_2(X)
  SECTION("Phi(X) = [[0, X], [1, 0]] and Phi(X)^2 = diag(X, X)") {
    LocalMatrix phiX = phi_matrix(mult_by(R, LocalFrac::variable(R, 0)));
    REQUIRE(phiX.at(0, 0).is_zero());
    REQUIRE(phiX.at(0, 1) == LocalFrac::variable(R, 0));
    REQUIRE(phiX.at(1, 0) == LocalFrac::one(R));
    REQUIRE(phiX.at(1, 1).is_zero());
    LocalMatrix sq = phiX * phiX;
    REQUIRE(sq == block_diag(mult_by(R, LocalFrac::variable(R, 0)), 2));
  }
  SECTION("Phi(X+1)^2 = diag(X+1, X+1) over F_2") {
    LocalFrac xp1 = LocalFrac::variable(R, 0) + LocalFrac::one(R);
    LocalMatrix phiA = phi_matrix(mult_by(R, xp1));
    REQUIRE(phiA * phiA == block_diag(mult_by(R, xp1), 2));
  }
  SECTION("Phi(1) is the identity of the expanded size") {
    LocalRing R3(3, 2, 1);
    LocalMatrix phi1 = phi_matrix(LocalMatrix::identity(R3, 2));
    REQUIRE(phi1 == LocalMatrix::identity(R3, 6));
  }
}

TEST_CASE("phi reassembly on 500 random fractions") {
  std::mt19937 rng(321);
  for (int iter = 0; iter < 500; ++iter) {
    LocalRing R(iter % 2 ? 3 : 2, 1 + iter % 3, 1);
    LocalFrac f = random_frac(rng, R);
    FracVec parts = phi_split(f);
    REQUIRE(parts.size() == static_cast<size_t>(static_cast<long long>(R.p)));
    REQUIRE(phi_reassemble(parts, R) == f);
  }
}

TEST_CASE("phi matrix multiplicativity on 100 random pairs") {
  std::mt19937 rng(654);
  for (int iter = 0; iter < 100; ++iter) {
    LocalRing R(iter % 2 ? 3 : 2, 1 + iter % 2, 1);
    size_t d = 1 + iter % 2;
    LocalMatrix A = random_matrix(rng, R, d, d);
    LocalMatrix B = random_matrix(rng, R, d, d);
    REQUIRE(phi_matrix(A * B) == phi_matrix(A) * phi_matrix(B));
  }
}

TEST_CASE("phi commutes with reduction mod p") {
  std::mt19937 rng(987);
  for (int iter = 0; iter < 50; ++iter) {
    LocalRing R(iter % 2 ? 3 : 2, 2 + iter % 2, 1);
    LocalMatrix A = random_matrix(rng, R, 2, 2);
    REQUIRE(phi_matrix(A).reduce_to(1) == phi_matrix(A.reduce_to(1)));
  }
}

TEST_CASE("phi of matrix acts as phi of the image vector") {
  std::mt19937 rng(111);
  for (int iter = 0; iter < 40; ++iter) {
    LocalRing R(iter % 2 ? 3 : 2, 1 + iter % 3, 1);
    size_t d = 1 + iter % 3;
    LocalMatrix A = random_matrix(rng, R, d, d);
    FracVec v(d, LocalFrac::zero(R));
    for (auto& x : v) x = random_frac(rng, R, 2);
    REQUIRE(phi_matrix(A) * phi_vector(v, R) == phi_vector(A * v, R));
  }
}

TEST_CASE("field_frobenius_split worked examples") {
  SECTION("scalar algebra over F_p, d = 1, n = 1") {
    LocalRing R(2, 1, 1);
    auto fs = field_frobenius_split({mult_by(R, LocalFrac::constant(R, 1))}, 1);
    REQUIRE(fs.s == 0);  // t = 1 forces p^s >= 1
  }
  SECTION("identity generator") {
    LocalRing R(3, 1, 1);
    auto fs = field_frobenius_split({LocalMatrix::identity(R, 2)}, 1);
    REQUIRE(fs.s == 0);
  }
  SECTION("F_2(X)[N]/<N^2>: t = 2 forces s = 1") {
    LocalRing R(2, 1, 1);
    LocalMatrix N(R, 2, 2);
    N.at(0, 1) = LocalFrac::variable(R, 0);
    LocalMatrix B = LocalMatrix::identity(R, 2) + N;
    auto fs = field_frobenius_split({B}, 2);
    REQUIRE(fs.s == 1);  // postcondition verified inside
  }
}

TEST_CASE("hensel_lift_split worked examples") {
  LocalRing R(2, 2, 1);  // Z/4(X)
  SECTION("B = C, R = I: nothing to lift") {
    std::mt19937 rng(12);
    LocalMatrix C = random_matrix(rng, R, 2, 2);
    auto hl = hensel_lift_split({C}, {C}, LocalMatrix::identity(R, 2), 1);
    REQUIRE(hl.ell == 0);
    REQUIRE(hl.R == LocalMatrix::identity(R, 2));
  }
  SECTION("d=2, e=2, p=2 with B = C + 2M") {
    std::mt19937 rng(13);
    for (int iter = 0; iter < 10; ++iter) {
      LocalMatrix C(R, 2, 2);
      do {
        C = random_matrix(rng, R, 2, 2);
      } while (field_rank(C.reduce_to(1)) != 2);
      // commuting pair: C and C^2; perturbations by polynomials in C keep
      // everything commuting
      LocalMatrix B1 = C + (C * C).times_p_power(1);
      LocalMatrix B2 = C * C + C.times_p_power(1);
      auto hl = hensel_lift_split({B1, B2}, {C, C * C}, LocalMatrix::identity(R, 2), 1);
      // a = e-1 = 1 so the congruence mod p^2 is exact equality
      LocalMatrix Rinv = invert_matrix_hensel(hl.R);
      Int pl = int_pow(Int(2), Int(hl.ell));
      REQUIRE(Rinv * B1.pow(pl) * hl.R == C.pow(pl));
      REQUIRE(Rinv * B2.pow(pl) * hl.R == (C * C).pow(pl));
    }
  }
  SECTION("congruence precondition is checked") {
    std::mt19937 rng(14);
    LocalMatrix C = LocalMatrix::identity(R, 2);
    LocalMatrix B = C;
    B.at(0, 1) = LocalFrac::one(R);  // differs from C mod p
    REQUIRE_THROWS_AS(hensel_lift_split({B}, {C}, LocalMatrix::identity(R, 2), 1),
                      std::invalid_argument);
  }
}

TEST_CASE("pseudo_frobenius_split worked examples") {
  SECTION("A = X over Z/p^e(X): s = 0") {
    for (int e = 1; e <= 3; ++e) {
      LocalRing R(2, e, 1);
      auto ps = pseudo_frobenius_split({mult_by(R, LocalFrac::variable(R, 0))}, 1);
      REQUIRE(ps.s == 0);
    }
  }
  SECTION("e = 1 equals the field split verbatim") {
    LocalRing R(3, 1, 1);
    LocalMatrix A = mult_by(R, LocalFrac::variable(R, 0) + LocalFrac::one(R));
    auto ps = pseudo_frobenius_split({A}, 1);
    REQUIRE(ps.s == 0);
  }
  SECTION("A = X+1 over Z/4(X): s >= 1 is required") {
    LocalRing R(2, 2, 1);
    LocalMatrix A = mult_by(R, LocalFrac::variable(R, 0) + LocalFrac::one(R));
    auto ps = pseudo_frobenius_split({A}, 2);
    REQUIRE(ps.s >= 1);  // Phi(X+1)^2 is not diagonal over Z/4
  }
  SECTION("pair of commuting generators over Z/4(X)") {
    LocalRing R(2, 2, 1);
    LocalMatrix A1 = mult_by(R, LocalFrac::variable(R, 0));
    LocalMatrix A2 = mult_by(R, LocalFrac::variable(R, 0) + LocalFrac::one(R));
    auto ps = pseudo_frobenius_split({A1, A2}, 2);
    REQUIRE(ps.s >= 1);
  }
}
