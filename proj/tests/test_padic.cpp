#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "corpus.hpp"
#include "support.hpp"

using namespace tidyscale;
using namespace tidyscale::padic;
using tidyscale::exactmath::parse_rational;

namespace {

Rational q(const char* s) { return parse_rational(s); }

RatMatrix diag(std::initializer_list<Rational> d) {
  RatMatrix m(d.size(), d.size());
  std::size_t i = 0;
  for (auto& x : d) {
    m(i, i) = x;
    ++i;
  }
  return m;
}

// Example 6.10 generators on Psi: (alpha_i g)(m) = 3^{-m_i} g(m).
std::vector<Automorphism> psi_generators(const std::vector<std::pair<long, long>>& psi) {
  RatMatrix a1(psi.size(), psi.size()), a2(psi.size(), psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    a1(i, i) = corpus::ppow(3, -psi[i].first);
    a2(i, i) = corpus::ppow(3, -psi[i].second);
  }
  return {Automorphism(a1, 3), Automorphism(a2, 3)};
}

Lattice coord_lattice(std::size_t n, std::initializer_list<std::size_t> coords, long p) {
  RatMatrix b(n, coords.size());
  std::size_t j = 0;
  for (auto c : coords) b(c, j++) = 1;
  return Lattice(b, p);
}

} // namespace

TEST_CASE("scale examples") {
  CHECK(scale(Automorphism(diag({q("1/3"), 1, 3}), 3)) == 3);
  CHECK(scale(Automorphism(RatMatrix::identity(3), 5)) == 1);
  Automorphism a(RatMatrix{{0, 1}, {3, 0}}, 3);
  CHECK(scale(a) == 1);
  CHECK(scale(a.inverse()) == 3);
  CHECK_THROWS_AS(Automorphism(RatMatrix{{1, 2}, {2, 4}}, 3), SingularityError);
  CHECK_THROWS_AS(Automorphism(RatMatrix::identity(2), 6), InputError);
}

TEST_CASE("lattice arithmetic examples") {
  for (long p : {2, 3, 5}) {
    Lattice z = Lattice::standard(2, p);
    CHECK(index(image(RatMatrix{{p, 0}, {0, p}}, z), z) == p * p);
    CHECK(sum(z, z) == z);
    CHECK(index(z, z) == 1);
  }
  Lattice z = Lattice::standard(2, 3);
  Lattice m = intersect(z, image(diag({q("1/3"), 3}), z));
  CHECK(m == Lattice(RatMatrix{{1, 0}, {0, 3}}, 3));
  CHECK(image(diag({q("1/3"), 3}), z).to_string() == "<(1/3,0), (0,3)>");
  // canonical form is independent of the generating set
  Lattice a(RatMatrix{{2, 1}, {0, 1}}, 3), b(RatMatrix{{1, 3}, {1, 5}}, 3);
  CHECK(a == b);
  CHECK(a == z); // 2 is a unit at p = 3
  CHECK(index_pair(image(diag({q("1/3"), 3}), z), z) == std::pair<Integer, Integer>{3, 3});
  CHECK_THROWS_AS(index(z, image(diag({3, 3}), z)), CommensurabilityError);
  CHECK(measure_ratio(image(diag({q("1/9"), 3}), z), z) == 3);
  // partial rank: prime-to-p denominators are forced by the subspace
  Lattice line = meet_subspace(Lattice::standard(2, 2), RatMatrix{{3}, {1}});
  CHECK(line.to_string() == "<(1,1/3)>");
}

TEST_CASE("property: lattice operations on random inputs") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 60; ++it) {
    long p = (long[]){2, 3, 5}[it % 3];
    auto m1 = testsupport::random_int_matrix(rng, 3, 3, -6, 6);
    auto m2 = testsupport::random_int_matrix(rng, 3, 3, -6, 6);
    if (exactmath::determinant(exactmath::to_rational(m1)) == 0 ||
        exactmath::determinant(exactmath::to_rational(m2)) == 0)
      continue;
    Lattice a(exactmath::to_rational(m1), p), b(exactmath::to_rational(m2), p);
    Lattice s = sum(a, b), i = intersect(a, b);
    CHECK(s.contains(a));
    CHECK(s.contains(b));
    CHECK(a.contains(i));
    CHECK(b.contains(i));
    // [a+b : b] = [a : a n b]
    CHECK(index(b, s) == index(i, a));
    CHECK(Lattice(hconcat(a.basis(), a.basis()), p) == a);
  }
}

TEST_CASE("slope decomposition examples") {
  auto d = slope_decomposition(Automorphism(diag({q("1/3"), 1, 3}), 3));
  REQUIRE(d.parts.size() == 3);
  CHECK(d.parts[0].slope == -1);
  CHECK(d.parts[1].slope == 0);
  CHECK(d.parts[2].slope == 1);
  for (auto& part : d.parts) CHECK(part.dim() == 1);

  d = slope_decomposition(Automorphism(RatMatrix{{0, 1}, {3, 0}}, 3));
  REQUIRE(d.parts.size() == 1);
  CHECK(d.parts[0].slope == q("1/2"));
  CHECK(d.parts[0].dim() == 2);

  d = slope_decomposition(Automorphism(RatMatrix{{0, 1}, {-1, q("10/3")}}, 3));
  REQUIRE(d.parts.size() == 2);
  CHECK(d.parts[0].slope == -1);
  CHECK(d.parts[1].slope == 1);

  // x^2 + x + 9 is irreducible over Q with roots of valuations 2 and 0 at p = 3
  CHECK_THROWS_AS(slope_decomposition(Automorphism(RatMatrix{{0, -9}, {1, -1}}, 3)),
                  SlopeSeparabilityError);
}

TEST_CASE("step 1 examples") {
  Automorphism a(diag({q("1/3"), 3}), 3);
  CHECK(step1_tidy(a) == Lattice::standard(2, 3));
  RatMatrix P{{1, 1}, {0, 1}};
  Automorphism c(P * a.matrix() * exactmath::inverse(P), 3);
  Lattice t = step1_tidy(c);
  CHECK(t == image(P, Lattice::standard(2, 3)));
  CHECK(displacement(c, t) == 3);
  CHECK(step1_tidy(Automorphism(RatMatrix::identity(3), 2)) == Lattice::standard(3, 2));
  // conjugators with p in the determinant force actual trimming
  std::mt19937_64 rng(9);
  int trimmed = 0;
  for (int it = 0; it < 30; ++it) {
    long p = (long[]){2, 3, 5}[it % 3];
    Automorphism b(corpus::random_sample(rng, 2 + it % 2, p).alpha, p);
    Lattice t2 = step1_tidy(b);
    CHECK(displacement(b, t2) == scale(b));
    CHECK(Lattice::standard(b.dim(), p).contains(t2));
    if (t2 != Lattice::standard(b.dim(), p)) ++trimmed;
  }
  CHECK(trimmed > 0);
}

TEST_CASE("parts examples") {
  Automorphism a(diag({q("1/3"), 1, 3}), 3);
  auto pr = parts(a, Lattice::standard(3, 3));
  CHECK(pr.plus == coord_lattice(3, {0, 1}, 3));
  CHECK(pr.minus == coord_lattice(3, {1, 2}, 3));
  CHECK(pr.zero == coord_lattice(3, {1}, 3));

  auto id = parts(Automorphism(RatMatrix::identity(2), 3), Lattice::standard(2, 3));
  CHECK(id.plus == Lattice::standard(2, 3));
  CHECK(id.zero == Lattice::standard(2, 3));

  auto half = parts(Automorphism(RatMatrix{{0, 1}, {3, 0}}, 3), Lattice::standard(2, 3));
  CHECK(half.plus.rank() == 0);
  CHECK(half.zero.rank() == 0);
  CHECK(half.minus == Lattice::standard(2, 3));

  Automorphism b(RatMatrix{{1, q("1/9")}, {0, 3}}, 3);
  if (!is_tidy(b, Lattice::standard(2, 3)))
    CHECK_THROWS_AS(parts(b, Lattice::standard(2, 3)), PreconditionError);
}

TEST_CASE("eigenfactors and relative scales on the product of three copies of Q_3") {
  // Psi = {(0,0), (1,0), (0,1)}
  auto g = psi_generators({{0, 0}, {1, 0}, {0, 1}});
  Lattice u = Lattice::standard(3, 3);
  CHECK(common_tidy(g) == u);
  CHECK(eigenfactor(u, {g[0], g[1].inverse()}) == coord_lattice(3, {0, 1}, 3));
  CHECK(eigenfactor(u, {}) == u);
  Automorphism a(diag({q("1/3"), 3}), 3);
  CHECK(eigenfactor(Lattice::standard(2, 3), {a, a.inverse()}).rank() == 0);

  CHECK(relative_scale({g[0], g[1].inverse()}, g[0], u) == 3);
  CHECK(relative_scale({g[0], g[1].inverse()}, g[1].inverse(), u) == 1);
  CHECK(relative_scale({}, Automorphism(diag({q("1/3"), 1, 3}), 3), Lattice::standard(3, 3)) == 3);

  Automorphism nc(RatMatrix{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}, 3);
  CHECK_THROWS_AS(eigenfactor(u, {g[0], nc}), UnsupportedError);
  CHECK_THROWS_AS(common_tidy({g[0], nc}), UnsupportedError);
}

TEST_CASE("common tidy examples") {
  Automorphism a(diag({q("1/3"), 3}), 3), b(diag({3, q("1/3")}), 3);
  CHECK(common_tidy({a, b}) == Lattice::standard(2, 3));
  RatMatrix P{{4, 1}, {3, 1}};
  Automorphism c(P * a.matrix() * exactmath::inverse(P), 3);
  CHECK(common_tidy({c}) == step1_tidy(c));
  auto g4 = psi_generators({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  CHECK(common_tidy(g4) == Lattice::standard(4, 3));
}

TEST_CASE("property: S1, S2 and S3 on the random corpus") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 60; ++it) {
    long p = (long[]){2, 3, 5}[it % 3];
    auto s = corpus::random_sample(rng, 2 + it % 2, p);
    Automorphism a(s.alpha, p);
    Integer s1 = scale(a);
    for (long n = 1; n <= 4; ++n) {
      Integer expect = exactmath::ipow(s1, n);
      CHECK(scale(a.pow(n)) == expect);
    }
    Integer sinv = scale(a.inverse());
    Rational lhs = Rational(s1) / Rational(sinv);
    Rational rhs = exactmath::rpow(p, -exactmath::valuation(exactmath::determinant(s.alpha), p));
    CHECK(lhs == rhs);
    Lattice t = step1_tidy(a);
    bool invariant = image(a, t) == t;
    CHECK(invariant == (s1 == 1 && sinv == 1));
  }
}

TEST_CASE("property: commuting families (Cor 4.9, Thm 4.6, Lemma 3.1)") {
  std::mt19937_64 rng(33);
  for (int it = 0; it < 15; ++it) {
    long p = (long[]){2, 3, 5}[it % 3];
    const std::size_t n = 3;
    RatMatrix P = corpus::random_sample(rng, n, p).P;
    std::vector<Automorphism> fam;
    std::uniform_int_distribution<long> kd(-2, 2);
    for (int g = 0; g < 2; ++g) {
      RatMatrix d(n, n);
      for (std::size_t i = 0; i < n; ++i) d(i, i) = corpus::ppow(p, kd(rng)) * corpus::unit(rng, p);
      fam.emplace_back(P * d * exactmath::inverse(P), p);
    }
    Lattice u = common_tidy(fam);
    for (auto& g : fam) CHECK(is_tidy(g, u));
    // Cor 4.9: beta(U_a) = beta(U)_a
    for (auto& beta : fam)
      for (int sgn = 0; sgn < 4; ++sgn) {
        std::vector<Automorphism> a{sgn & 1 ? fam[0] : fam[0].inverse(), sgn & 2 ? fam[1] : fam[1].inverse()};
        CHECK(image(beta, eigenfactor(u, a)) == eigenfactor(image(beta, u), a));
      }
    // Thm 4.6 (abelian form): the eigenfactors over all sign patterns sum to U
    Lattice total = Lattice::zero(n, p);
    for (int sgn = 0; sgn < 4; ++sgn)
      total = sum(total, eigenfactor(u, {sgn & 1 ? fam[0] : fam[0].inverse(), sgn & 2 ? fam[1] : fam[1].inverse()}));
    CHECK(total == u);
    // Lemma 3.1: beta^j(U) stays tidy for alpha
    for (long j = -2; j <= 2; ++j) CHECK(is_tidy(fam[0], image(fam[1].pow(j), u)));
  }
}

TEST_CASE("property: bounded forward orbits lie in V-") {
  std::mt19937_64 rng(44);
  for (int it = 0; it < 20; ++it) {
    long p = (long[]){2, 3, 5}[it % 3];
    Automorphism a(corpus::random_sample(rng, 3, p).alpha, p);
    Lattice v = step1_tidy(a);
    auto pr = parts(a, v);
    auto dec = slope_decomposition(a);
    for (auto& part : dec.parts) {
      Lattice piece = meet_subspace(v, part.basis);
      for (std::size_t j = 0; j < piece.rank(); ++j) {
        auto x = piece.basis().column(j);
        // forward orbit bounded within p^{-4} V for 12 steps iff slope >= 0
        RatMatrix scaled = v.basis();
        for (std::size_t r = 0; r < 3; ++r)
          for (std::size_t c = 0; c < 3; ++c) scaled(r, c) *= corpus::ppow(p, -4);
        Lattice big(scaled, p);
        RatMatrix y(3, 1);
        y.set_column(0, x);
        bool bounded = true;
        for (int k = 0; k < 12 && bounded; ++k) {
          y = a.matrix() * y;
          bounded = big.contains_vector(y.column(0));
        }
        CHECK(bounded == (part.slope >= 0));
        CHECK(pr.minus.contains_vector(x) == (part.slope >= 0));
      }
    }
  }
}
