#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "tidyscale/torus.hpp"

using namespace tidyscale;
using namespace tidyscale::torus;

namespace {

Diagonal random_w(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<long> d(-3, 3);
  std::vector<long> w(n);
  long s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += (w[i] = d(rng));
  w[n - 1] = -s;
  return Diagonal(w);
}

// Upper triangular with p on the strict upper part: U_{alpha_1+}.
Pattern upper_part() {
  return Pattern({{0, 1, 1}, {kAbsent, 0, 1}, {kAbsent, kAbsent, 0}});
}

} // namespace

TEST_CASE("conjugate examples") {
  Pattern u = Pattern::iwahori(3);
  Pattern c = conjugate(u, Diagonal({-1, 0, 1}));
  CHECK(c.at(0, 1) == 0);
  CHECK(c.at(0, 2) == -1);
  CHECK(c.at(1, 2) == 0);
  CHECK(c.at(1, 0) == 1);
  CHECK(c.at(2, 0) == 2);
  CHECK(c.at(2, 1) == 1);
  CHECK(conjugate(u, Diagonal({0, 0, 0})) == u);
  Diagonal w({2, -1, -1});
  CHECK(conjugate(conjugate(u, w), w) == conjugate(u, w * 2));
  CHECK_THROWS_AS(Diagonal({1, 0, 0}), InputError);
  CHECK_THROWS_AS(Pattern({{0, 1}, {1, 1}}), InputError);
  CHECK_THROWS_AS(Pattern({{0, -1, 3}, {0, 0, -1}, {0, 0, 0}}), InputError); // -1 + -1 < 3
}

TEST_CASE("pattern index examples") {
  Pattern u = Pattern::iwahori(3);
  for (long p : {2, 3, 5}) {
    CHECK(scale(Diagonal({-1, 0, 1}), u, p) == p * p * p * p);
    CHECK(pattern_index(u, u, p) == 1);
    Integer prod = 1;
    for (auto& r : roots(3)) prod *= root_relative_scale(r, Diagonal({-1, 0, 1}), p);
    CHECK(prod == p * p * p * p);
  }
  CHECK_THROWS_AS(pattern_index(u, conjugate(u, Diagonal({1, 0, -1})), 2), CommensurabilityError);
}

TEST_CASE("root eigenfactors") {
  CHECK(root_eigenfactors(3).size() == 6);
  CHECK(root_eigenfactors(2).size() == 2);
  CHECK(root_relative_scale({1, 2}, Diagonal({-1, 0, 1}), 7) == 7);
  CHECK(root_modulus({2, 1}, Diagonal({-1, 0, 1}), 7) == Rational(1, 7));
  for (auto& e : root_eigenfactors(3)) {
    long s = 0;
    for (long c : e.functional) s += c;
    CHECK(s == 0);
  }
}

TEST_CASE("property: conjugation is an action and Thm 6.12 on 50 random w") {
  std::mt19937_64 rng(3);
  Pattern u = Pattern::iwahori(3);
  for (int it = 0; it < 50; ++it) {
    long p = (long[]){2, 3}[it % 2];
    Diagonal v = random_w(rng, 3), w = random_w(rng, 3);
    CHECK(conjugate(conjugate(u, v), w) == conjugate(u, v + w));
    Integer prod = 1;
    for (auto& r : roots(3)) prod *= root_relative_scale(r, w, p);
    CHECK(scale(w, u, p) == prod);
    Integer sv = scale(v, u, p), sw = scale(w, u, p), svw = scale(v + w, u, p);
    CHECK((sv * sw) % svw == 0);
    bool same = true;
    for (auto& r : roots(3)) {
      long a = v.w[r.j] - v.w[r.i], b = w.w[r.j] - w.w[r.i];
      if ((a > 0 && b < 0) || (a < 0 && b > 0)) same = false;
    }
    if (same) CHECK(svw == sv * sw);
  }
}

TEST_CASE("halving factorization: Example 6.11 U_{alpha1+} at p = 2, k = 2") {
  std::vector<Diagonal> seq{Diagonal({-1, 0, 1}), Diagonal({-1, 1, 0}), Diagonal({0, -1, 1})};
  auto h = halving_factorization_check(upper_part(), seq, 2, 2, 1e6);
  CHECK(h.pass);
  CHECK(h.front.image_size == 32);
  CHECK(h.front.product_size == 32);
  // the unipotent factors in halving order: (2,3), (1,2), (1,3)
  REQUIRE(h.front.order.size() == 4);
  CHECK(h.front.order[1] == "(+,-,+)(2,3)");
  CHECK(h.front.order[2] == "(+,+,-)(1,2)");
  CHECK(h.front.order[3] == "(+,+,+)(1,3)");
  CHECK(h.u0_positions_passing.size() == 4);
  // the order displayed for Example 6.11: U_a U_c U_b
  std::vector<Factor> acb{{"U_0", true, {}}, {"U_a", false, {{1, 2}}}, {"U_c", false, {{0, 2}}}, {"U_b", false, {{0, 1}}}};
  CHECK(ordered_product_check(upper_part(), acb, 2, 2, 1e6).pass);
  CHECK(ordered_product_check(upper_part(), acb, 3, 2, 1e6).pass);
  // dropping a factor breaks the equality and yields a witness
  std::vector<Factor> ac{{"U_0", true, {}}, {"U_a", false, {{1, 2}}}, {"U_c", false, {{0, 2}}}};
  auto bad = ordered_product_check(upper_part(), ac, 2, 2, 1e6);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.witness.empty());
}

TEST_CASE("halving factorization: UL factorization of the Iwahori subgroup") {
  auto h = halving_factorization_check(Pattern::iwahori(3), {Diagonal({-1, 0, 1})}, 2, 1, 1e6);
  CHECK(h.pass);
  CHECK(h.front.image_size == 8);
  auto h2 = halving_factorization_check(Pattern::iwahori(3), {Diagonal({-1, 0, 1})}, 2, 2, 1e6);
  CHECK(h2.pass);
  CHECK(h2.front.image_size == 2048);
  auto t = halving_factorization_check(Pattern::iwahori(3), {Diagonal({0, 0, 0})}, 2, 2, 1e6);
  CHECK(t.pass);
  CHECK_THROWS_AS(halving_factorization_check(Pattern::iwahori(3), {Diagonal({-1, 0, 1})}, 3, 2, 1e5),
                  ResourceError);
}
