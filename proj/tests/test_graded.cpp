#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "sunit/graded.hpp"

using namespace sunit;

namespace {

LocalFrac random_frac(std::mt19937& rng, const LocalRing& R, int max_deg = 1) {
  std::uniform_int_distribution<long long> coeff(0, 50);
  std::uniform_int_distribution<int> deg(0, max_deg);
  LaurentPoly n(R.nvars, R.modulus());
  for (int t = 0; t < 2; ++t) {
    ExpVec e(R.nvars, 0);
    for (long i = 0; i < R.nvars; ++i) e[i] = deg(rng);
    n.add_term(e, Int(coeff(rng)));
  }
  return LocalFrac::of_poly(R, n);
}

GradedEndo random_endo(std::mt19937& rng, const LocalRing& base, const GradedShape& shape) {
  GradedEndo f(base, shape);
  for (int i = 0; i < shape.levels(); ++i) {
    for (int k = 0; k < shape.levels(); ++k) {
      LocalRing Ri = f.level_ring(i);
      LocalMatrix blk(Ri, shape.d[i], shape.d[k]);
      for (long r = 0; r < shape.d[i]; ++r)
        for (long c = 0; c < shape.d[k]; ++c) {
          LocalFrac x = random_frac(rng, Ri);
          if (i > k) x = x.times_p_power(i - k);
          blk.at(r, c) = x;
        }
      f.set_block(i, k, blk);
    }
  }
  return f;
}

GradedAuto random_auto(std::mt19937& rng, const LocalRing& base, const GradedShape& shape) {
  while (true) {
    GradedEndo f = random_endo(rng, base, shape);
    try {
      return GradedAuto::of(f);
    } catch (const std::exception&) {
    }
  }
}

}  // namespace

TEST_CASE("graded composition preserves the divisibility constraint") {
  std::mt19937 rng(101);
  int done = 0;
  while (done < 500) {
    int e = 1 + done % 3;
    LocalRing base(done % 2 ? 3 : 2, e, 1);
    GradedShape shape;
    for (int i = 0; i < e; ++i) shape.d.push_back(1 + (done + i) % 2);
    GradedEndo f = random_endo(rng, base, shape);
    GradedEndo g = random_endo(rng, base, shape);
    REQUIRE(f.is_valid());
    REQUIRE(g.is_valid());
    REQUIRE((f * g).is_valid());
    ++done;
  }
}

TEST_CASE("graded inverse is exact") {
  std::mt19937 rng(202);
  for (int iter = 0; iter < 20; ++iter) {
    int e = 1 + iter % 3;
    LocalRing base(iter % 2 ? 3 : 2, e, 1);
    GradedShape shape;
    for (int i = 0; i < e; ++i) shape.d.push_back(1 + (iter + i) % 2);
    GradedAuto A = random_auto(rng, base, shape);
    REQUIRE(A.fwd * A.inv == GradedEndo::identity(base, shape));
    REQUIRE(A.inv * A.fwd == GradedEndo::identity(base, shape));
  }
}

TEST_CASE("triangularize_step worked examples") {
  LocalRing base(2, 2, 1);
  GradedShape shape{{1, 1}};
  SECTION("already divisible blocks: R = I, l = 0") {
    GradedEndo f = GradedEndo::identity(base, shape);
    std::vector<GradedAuto> As = {GradedAuto::of(f)};
    TriangularizeStep st = triangularize_step(As, 0, 1, 2);
    REQUIRE(st.ell == 0);
    // postcondition enforced inside; identity stays identity
    REQUIRE(As[0].fwd == GradedEndo::identity(base, shape));
  }
  SECTION("a >= b: nothing to prove") {
    std::mt19937 rng(7);
    std::vector<GradedAuto> As = {random_auto(rng, base, shape)};
    GradedAuto before = As[0];
    TriangularizeStep st = triangularize_step(As, 1, 1, 2);
    REQUIRE(st.ell == 0);
    REQUIRE(As[0].fwd == before.fwd);
  }
  SECTION("e=2, d1=d2=1, unit diagonal with nonzero upper block") {
    GradedEndo f = GradedEndo::identity(base, shape);
    LocalRing R1 = f.level_ring(0);
    LocalMatrix upper(R1, 1, 1);
    upper.at(0, 0) = LocalFrac::variable(R1, 0);
    f.set_block(0, 1, upper);
    std::vector<GradedAuto> As = {GradedAuto::of(f)};
    TriangularizeStep st = triangularize_step(As, 0, 1, 2);
    // conjugation checked inside the step; (1,2) block now divisible by p
    REQUIRE(As[0].fwd.block(0, 1).divisible_by_p_power(1));
  }
}

TEST_CASE("simultaneous triangularization and diagonalization") {
  SECTION("e=1 inputs are trivially done") {
    LocalRing base(2, 1, 1);
    GradedShape shape{{2}};
    std::mt19937 rng(33);
    std::vector<GradedAuto> As = {random_auto(rng, base, shape)};
    auto res = simultaneous_diagonalize(As);
    REQUIRE(res.transformed[0].fwd.is_block_diagonal());
  }
  SECTION("already lower-triangular input") {
    LocalRing base(2, 2, 1);
    GradedShape shape{{1, 1}};
    GradedEndo f = GradedEndo::identity(base, shape);
    LocalRing R2 = f.level_ring(1);
    LocalMatrix lower(R2, 1, 1);
    lower.at(0, 0) = LocalFrac::constant(R2, 2);
    f.set_block(1, 0, lower);
    auto res = simultaneous_triangularize({GradedAuto::of(f)});
    REQUIRE(res.transformed[0].fwd.is_block_lower_triangular());
  }
  SECTION("e=2 mixed instances, single and pairs") {
    std::mt19937 rng(44);
    for (int iter = 0; iter < 6; ++iter) {
      LocalRing base(iter % 2 ? 3 : 2, 2, 1);
      GradedShape shape{{1 + iter % 2, 1}};
      GradedAuto A = random_auto(rng, base, shape);
      // commuting family: A and A^2
      std::vector<GradedAuto> As = {A, A * A};
      auto res = simultaneous_diagonalize(As);
      for (const auto& T : res.transformed) REQUIRE(T.fwd.is_block_diagonal());
      // conjugation identity: R^{-1} A^{p^l} R = transformed
      Int pl = int_pow(base.p, Int(res.ell));
      REQUIRE(res.R.conjugate(A.fwd.pow(pl)) == res.transformed[0].fwd);
      REQUIRE(res.R.conjugate((A * A).fwd.pow(pl)) == res.transformed[1].fwd);
    }
  }
  SECTION("e=3 instance") {
    std::mt19937 rng(55);
    LocalRing base(2, 3, 1);
    GradedShape shape{{1, 1, 1}};
    GradedAuto A = random_auto(rng, base, shape);
    auto res = simultaneous_diagonalize({A});
    REQUIRE(res.transformed[0].fwd.is_block_diagonal());
    Int pl = int_pow(base.p, Int(res.ell));
    REQUIRE(res.R.conjugate(A.fwd.pow(pl)) == res.transformed[0].fwd);
  }
}

TEST_CASE("pir_module_decompose examples") {
  LocalRing R(2, 2, 1);  // Z/4(X)
  SECTION("presentation <2 e_1> in rank 1: d_1 = 1") {
    LocalMatrix M(R, 1, 1);
    M.at(0, 0) = LocalFrac::constant(R, 2);
    auto dec = pir_module_decompose(M);
    REQUIRE(dec.shape.d == std::vector<long>{1, 0});
  }
  SECTION("zero presentation in rank r: d_e = r") {
    LocalMatrix M(R, 3, 1);
    auto dec = pir_module_decompose(M);
    REQUIRE(dec.shape.d == std::vector<long>{0, 3});
  }
  SECTION("identity presentation: all d_i = 0") {
    auto dec = pir_module_decompose(LocalMatrix::identity(R, 2));
    REQUIRE(dec.shape.d == std::vector<long>{0, 0});
  }
}

TEST_CASE("stabilize_generator_chain examples") {
  LocalRing R(2, 2, 1);  // Z/4(X)
  SECTION("scalar generators stabilize immediately") {
    std::vector<LocalMatrix> gens = {LocalMatrix::identity(R, 1), LocalMatrix::identity(R, 1)};
    REQUIRE(stabilize_generator_chain(gens, 2) == 0);
  }
  SECTION("monomial generator X") {
    LocalMatrix m = LocalMatrix::scalar(R, 1, LocalFrac::variable(R, 0));
    REQUIRE(stabilize_generator_chain({m}, 2) == 0);
  }
  SECTION("2x2 companion-style generator") {
    // matrix [[0, X], [1, 0]]: invertible over Z/4(X)
    LocalMatrix m(R, 2, 2);
    m.at(0, 1) = LocalFrac::variable(R, 0);
    m.at(1, 0) = LocalFrac::one(R);
    long ell = stabilize_generator_chain({m}, 2);
    REQUIRE(ell >= 0);
    // chain equality at the returned index, verified independently
    auto b0 = detail::algebra_module_basis({m}, static_cast<int>(ell), R);
    auto b1 = detail::algebra_module_basis({m}, static_cast<int>(ell) + 2, R);
    for (const auto& v : b0) REQUIRE(submodule_member(b1, v, R));
  }
}
