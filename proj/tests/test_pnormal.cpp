#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "sunit/pnormal.hpp"

using namespace sunit;

namespace {

PSuccinctSet make_succinct(Int p, long ell, long D, std::vector<RatVec> a, std::vector<IntVec> H) {
  PSuccinctSet S;
  S.p = p;
  S.ell = ell;
  S.D = D;
  S.a = std::move(a);
  S.H = std::move(H);
  return S;
}

PNormalSet wrap(const PSuccinctSet& S) {
  PNormalSet N;
  N.p = S.p;
  N.D = S.D;
  N.parts = {S};
  return N;
}

// brute-force window of a succinct set by direct formula enumeration
std::set<IntVec> brute_window(const PSuccinctSet& S, long B, long kmax = 14, long hmax = 70) {
  std::set<IntVec> out;
  long r = S.r();
  std::vector<long> ks(r, 0);
  // enumerate h over bounded combinations of generators
  std::vector<IntVec> hs;
  std::vector<long> hc(S.H.size(), -hmax);
  while (true) {
    IntVec h(S.D, 0);
    for (size_t i = 0; i < S.H.size(); ++i)
      for (long j = 0; j < S.D; ++j) h[j] += hc[i] * S.H[i][j];
    hs.push_back(h);
    size_t i = 0;
    for (i = 0; i < hc.size(); ++i) {
      if (++hc[i] <= hmax) break;
      hc[i] = -hmax;
    }
    if (i == hc.size()) break;
  }
  while (true) {
    RatVec base = S.a[0];
    for (long i = 0; i < r; ++i) {
      Int pk = int_pow(S.p, Int(S.ell * ks[i]));
      for (long j = 0; j < S.D; ++j) base[j] += Rat(pk) * S.a[i + 1][j];
    }
    for (const auto& h : hs) {
      bool ok = true;
      IntVec x(S.D);
      for (long j = 0; j < S.D && ok; ++j) {
        Rat v = base[j] + h[j];
        if (rat_den(v) != 1) ok = false;
        else {
          x[j] = rat_num(v);
          if (x[j] < -B || x[j] > B) ok = false;
        }
      }
      if (ok) out.insert(x);
    }
    long i = 0;
    for (i = 0; i < r; ++i) {
      if (++ks[i] <= kmax) break;
      ks[i] = 0;
    }
    if (i == r || r == 0) break;
  }
  return out;
}

}  // namespace

TEST_CASE("validate_succinct examples") {
  SECTION("{1/2 + 3^n/2} is valid") {
    PSuccinctSet S = make_succinct(3, 1, 1, {{Rat(1, 2)}, {Rat(1, 2)}}, {});
    REQUIRE_FALSE(validate_succinct(S).has_value());
  }
  SECTION("a0 = 1/3 with p=2, l=1 is invalid") {
    PSuccinctSet S = make_succinct(2, 1, 1, {{Rat(1, 3)}, {Rat(2, 3)}}, {});
    REQUIRE(validate_succinct(S).has_value());
  }
  SECTION("all integral vectors are valid") {
    PSuccinctSet S = make_succinct(2, 2, 2, {{Rat(1), Rat(0)}, {Rat(3), Rat(-1)}}, {{1, 1}});
    REQUIRE_FALSE(validate_succinct(S).has_value());
  }
}

TEST_CASE("succinct_to_automaton examples") {
  SECTION("H alone gives the subgroup") {
    PSuccinctSet S = make_succinct(2, 1, 2, {{Rat(0), Rat(0)}}, {{1, 2}});
    PAutomaton A = succinct_to_automaton(S);
    PAutomaton H = automaton_for_subgroup({{1, 2}}, 2, 2);
    REQUIRE(enumerate_window(A, 8) == enumerate_window(H, 8));
  }
  SECTION("{2^k} as S(1; 0, 1; {0})") {
    PSuccinctSet S = make_succinct(2, 1, 1, {{Rat(0)}, {Rat(1)}}, {});
    PAutomaton A = succinct_to_automaton(S);
    std::set<IntVec> expect = {{1}, {2}, {4}, {8}, {16}};
    REQUIRE(enumerate_window(A, 16) == expect);
  }
  SECTION("{1/2 + 3^n/2} on window 50") {
    PSuccinctSet S = make_succinct(3, 1, 1, {{Rat(1, 2)}, {Rat(1, 2)}}, {});
    PAutomaton A = succinct_to_automaton(S);
    // n = 0 gives 1 (0 is in N throughout)
    std::set<IntVec> expect = {{1}, {2}, {5}, {14}, {41}};
    REQUIRE(enumerate_window(A, 50) == expect);
  }
}

TEST_CASE("succinct_to_automaton matches formula enumeration on random sets") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> small(-2, 2);
  for (int iter = 0; iter < 12; ++iter) {
    Int p = (iter % 2) ? 3 : 2;
    long ell = 1 + iter % 2;
    long D = 1 + iter % 2;
    long r = iter % 3 == 2 ? 2 : 1;
    Int scale = int_pow(p, Int(ell)) - 1;
    // a_i with (p^l - 1) a_i integral and the total sum integral
    std::vector<RatVec> a(r + 1, RatVec(D, Rat(0)));
    RatVec tail_sum(D, Rat(0));
    for (long i = 1; i <= r; ++i)
      for (long j = 0; j < D; ++j) {
        a[i][j] = Rat(Int(small(rng)), scale);
        tail_sum[j] += a[i][j];
      }
    for (long j = 0; j < D; ++j) a[0][j] = Rat(Int(small(rng))) - tail_sum[j];
    std::vector<IntVec> H;
    if (iter % 2) {
      IntVec h(D, 0);
      h[0] = 2;
      H.push_back(h);
    }
    PSuccinctSet S = make_succinct(p, ell, D, a, H);
    REQUIRE_FALSE(validate_succinct(S).has_value());
    PAutomaton A = succinct_to_automaton(S);
    REQUIRE(enumerate_window(A, 20) == brute_window(S, 20));
  }
}

TEST_CASE("pnormal membership examples") {
  PSuccinctSet pow2 = make_succinct(2, 1, 1, {{Rat(0)}, {Rat(1)}}, {});
  REQUIRE(pnormal_member(wrap(pow2), {Int(4)}));
  REQUIRE_FALSE(pnormal_member(wrap(pow2), {Int(3)}));
  PSuccinctSet half = make_succinct(3, 1, 1, {{Rat(1, 2)}, {Rat(1, 2)}}, {});
  REQUIRE(pnormal_member(wrap(half), {Int(41)}));
}

TEST_CASE("rectangular_solutions examples") {
  SECTION("R=1 with both vectors in G: all of N") {
    std::vector<IntVec> G = {{1}};
    auto cosets = rectangular_solutions(2, G, {{Int(5)}, {Int(3)}});
    for (long k = 0; k <= 20; ++k) {
      bool found = false;
      for (const auto& cs : cosets) found |= cs.contains({Int(k)});
      REQUIRE(found);
    }
  }
  SECTION("R=1, q=2, G=3Z, a0=0, a1=1: empty") {
    std::vector<IntVec> G = {{3}};
    auto cosets = rectangular_solutions(2, G, {{Int(0)}, {Int(1)}});
    for (long k = 0; k <= 20; ++k) {
      bool found = false;
      for (const auto& cs : cosets) found |= cs.contains({Int(k)});
      REQUIRE_FALSE(found);
    }
  }
  SECTION("R=2, q=2, diagonal lattice: solutions are k1 = k2") {
    // brute force over k <= 12 pins the set: with a1 = (1,0), a2 = (0,1) the
    // membership 2^{k1} a1 + 2^{k2} a2 in the lattice spanned by (1,1) holds
    // exactly on the diagonal
    std::vector<IntVec> G = {{1, 1}};
    auto cosets = rectangular_solutions(2, G, {{Int(0), Int(0)}, {Int(1), Int(0)}, {Int(0), Int(1)}});
    for (long k1 = 0; k1 <= 12; ++k1)
      for (long k2 = 0; k2 <= 12; ++k2) {
        bool found = false;
        for (const auto& cs : cosets) found |= cs.contains({Int(k1), Int(k2)});
        REQUIRE(found == (k1 == k2));
      }
  }
}

TEST_CASE("rectangular_solutions matches brute force on 50 random instances") {
  std::mt19937 rng(2025);
  std::uniform_int_distribution<int> coeff(-4, 4);
  std::uniform_int_distribution<int> Rdist(1, 3);
  std::uniform_int_distribution<int> Ddist(1, 2);
  for (int iter = 0; iter < 50; ++iter) {
    Int q = (iter % 2) ? 3 : 2;
    int R = Rdist(rng);
    int D = Ddist(rng);
    std::vector<IntVec> a(R + 1, IntVec(D, 0));
    for (int i = 0; i <= R; ++i)
      for (int j = 0; j < D; ++j) a[i][j] = coeff(rng);
    std::vector<IntVec> G;
    int ngens = iter % 3;
    for (int g = 0; g < ngens; ++g) {
      IntVec v(D, 0);
      for (int j = 0; j < D; ++j) v[j] = coeff(rng);
      G.push_back(v);
    }
    auto cosets = rectangular_solutions(q, G, a);
    std::vector<long> k(R, 0);
    while (true) {
      IntVec x = a[0];
      for (int i = 0; i < R; ++i) {
        Int qe = int_pow(q, Int(k[i]));
        for (int j = 0; j < D; ++j) x[j] += qe * a[i + 1][j];
      }
      std::vector<IntVec> Gg = G;
      if (Gg.empty()) Gg.push_back(IntVec(D, 0));
      bool expect = lattice_member(Gg, x);
      IntVec kk(R);
      for (int i = 0; i < R; ++i) kk[i] = k[i];
      bool got = false;
      for (const auto& cs : cosets) got |= cs.contains(kk);
      REQUIRE(got == expect);
      int i = 0;
      for (i = 0; i < R; ++i) {
        if (++k[i] <= 12) break;
        k[i] = 0;
      }
      if (i == R) break;
    }
  }
}

TEST_CASE("intersect_normal examples") {
  PSuccinctSet pow2 = make_succinct(2, 1, 1, {{Rat(0)}, {Rat(1)}}, {});
  SECTION("S ∩ S = S on a window") {
    PNormalSet I = intersect_normal(wrap(pow2), wrap(pow2));
    REQUIRE(pnormal_window(I, 64) == pnormal_window(wrap(pow2), 64));
  }
  SECTION("S ∩ ∅ = ∅") {
    PNormalSet empty;
    empty.p = 2;
    empty.D = 1;
    PNormalSet I = intersect_normal(wrap(pow2), empty);
    REQUIRE(I.empty_union());
  }
  SECTION("{2^k} ∩ 4Z on window 256") {
    PSuccinctSet mult4 = make_succinct(2, 1, 1, {{Rat(0)}}, {{4}});
    PNormalSet I = intersect_normal(wrap(pow2), wrap(mult4));
    // window membership oracle: the powers of two that are multiples of 4
    std::set<IntVec> expect = {{4}, {8}, {16}, {32}, {64}, {128}, {256}};
    std::set<IntVec> got;
    for (const auto& x : pnormal_window(I, 256)) got.insert(x);
    REQUIRE(got == expect);
  }
}

TEST_CASE("intersect_normal matches window brute force on random pairs") {
  std::mt19937 rng(31415);
  std::uniform_int_distribution<int> small(-2, 2);
  auto random_set = [&](Int p, long D) {
    long ell = 1 + static_cast<long>(rng() % 2);
    long r = static_cast<long>(rng() % 3);
    if (D >= 3) r = static_cast<long>(rng() % 2);  // keep the expanded alphabet tame
    Int scale = int_pow(p, Int(ell)) - 1;
    std::vector<RatVec> a(r + 1, RatVec(D, Rat(0)));
    RatVec tail(D, Rat(0));
    for (long i = 1; i <= r; ++i)
      for (long j = 0; j < D; ++j) {
        a[i][j] = Rat(Int(small(rng)), scale);
        tail[j] += a[i][j];
      }
    for (long j = 0; j < D; ++j) a[0][j] = Rat(Int(small(rng))) - tail[j];
    std::vector<IntVec> H;
    int ngens = static_cast<int>(rng() % 2);
    for (int g = 0; g < ngens; ++g) {
      IntVec h(D, 0);
      for (long j = 0; j < D; ++j) h[j] = small(rng);
      H.push_back(h);
    }
    return wrap(make_succinct(p, ell, D, a, H));
  };
  int done = 0;
  while (done < 30) {
    long D = (done % 5 == 4) ? 3 : 1 + done % 2;
    Int p = (done % 2 && D < 3) ? 3 : 2;
    PNormalSet A = random_set(p, D);
    PNormalSet B = random_set(p, D);
    if (validate_succinct(A.parts[0]) || validate_succinct(B.parts[0])) continue;
    PNormalSet I = intersect_normal(A, B);
    long BND = 64;
    auto wa = pnormal_window(A, BND);
    auto wb = pnormal_window(B, BND);
    std::set<IntVec> expect;
    for (const auto& x : wa)
      if (wb.count(x)) expect.insert(x);
    REQUIRE(pnormal_window(I, BND) == expect);
    ++done;
  }
}

TEST_CASE("pnormal text format round-trips") {
  PSuccinctSet S = make_succinct(2, 3, 2, {{Rat(1, 2), Rat(0)}, {Rat(1, 2), Rat(0)}}, {{1, 1}});
  std::string line = succinct_to_text(S);
  REQUIRE(line == "succinct p=2 l=3 a0=[1/2,0] a1=[1/2,0] H=[[1,1]]");
  PSuccinctSet T = parse_succinct_line(line);
  REQUIRE(succinct_to_text(T) == line);
  PNormalSet N = wrap(S);
  N.parts.push_back(S);
  PNormalSet M = parse_pnormal_text(pnormal_to_text(N));
  REQUIRE(pnormal_to_text(M) == pnormal_to_text(N));
}
