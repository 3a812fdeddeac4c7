// Acceptance runner: one PASS/FAIL line per criterion, with its tolerance and
// time limit. Exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "corpus.hpp"
#include "support.hpp"
#include "tidyscale/cli.hpp"
#include "tidyscale/invariants.hpp"

using namespace tidyscale;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::string& tolerance, double limit_s,
               const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("time limit exceeded");
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s (%s; %.2f s, limit %.0f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              tolerance.c_str(), secs, limit_s, o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

// ---- criterion 1 oracle ----

long vp(const Rational& q, long p) { return exactmath::valuation(q, Integer(p)); }

// [M Z_p^n + Z_p^n : Z_p^n] from the p-adic determinantal divisors of M:
// the k-th elementary divisor has valuation delta_k - delta_{k-1}, where
// delta_k is the least valuation of a k x k minor.
long local_log_index(const RatMatrix& M, long p) {
  const std::size_t n = M.rows();
  std::vector<long> delta(n + 1, 0);
  std::vector<std::size_t> rows, cols;
  for (std::size_t k = 1; k <= n; ++k) {
    std::optional<long> best;
    std::vector<bool> rsel(n, false), csel(n, false);
    std::fill(rsel.begin(), rsel.begin() + long(k), true);
    do {
      std::fill(csel.begin(), csel.end(), false);
      std::fill(csel.begin(), csel.begin() + long(k), true);
      do {
        RatMatrix sub(k, k);
        std::size_t a = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!rsel[i]) continue;
          std::size_t b = 0;
          for (std::size_t j = 0; j < n; ++j)
            if (csel[j]) sub(a, b++) = M(i, j);
          ++a;
        }
        Rational d = exactmath::determinant(sub);
        if (d != 0) {
          long v = vp(d, p);
          if (!best || v < *best) best = v;
        }
      } while (std::prev_permutation(csel.begin(), csel.end()));
    } while (std::prev_permutation(rsel.begin(), rsel.end()));
    delta[k] = *best;
  }
  long e = 0;
  for (std::size_t k = 1; k <= n; ++k) e += std::max(0L, -(delta[k] - delta[k - 1]));
  return e;
}

// Every lattice p^2 Z^n <= L <= Z^n, as its column Hermite basis: upper
// triangular, diagonal p^{e_i} with e_i <= 2, row entries reduced mod the pivot.
std::vector<IntMatrix> height2_lattices(std::size_t n, long p) {
  std::vector<IntMatrix> out;
  std::vector<long> e(n);
  std::function<void(std::size_t)> diag = [&](std::size_t i) {
    if (i == n) {
      std::vector<std::pair<std::size_t, std::size_t>> slots;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c) slots.push_back({r, c});
      IntMatrix H(n, n);
      for (std::size_t r = 0; r < n; ++r) H(r, r) = exactmath::ipow(p, unsigned(e[r]));
      std::function<void(std::size_t)> fill = [&](std::size_t s) {
        if (s == slots.size()) {
          // p^2 Z^n <= H Z^n  iff  p^2 H^-1 is integral
          RatMatrix inv = exactmath::inverse(exactmath::to_rational(H));
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
              if (Rational(inv(r, c) * p * p).get_den() != 1) return;
          out.push_back(H);
          return;
        }
        auto [r, c] = slots[s];
        long m = 1;
        for (long k = 0; k < e[r]; ++k) m *= p;
        for (long v = 0; v < m; ++v) {
          H(r, c) = v;
          fill(s + 1);
        }
        H(r, c) = 0;
      };
      fill(0);
      return;
    }
    for (long k = 0; k <= 2; ++k) {
      e[i] = k;
      diag(i + 1);
    }
  };
  diag(0);
  return out;
}

struct Corpus {
  std::vector<corpus::Sample> samples;
};

Corpus make_corpus() {
  Corpus c;
  std::mt19937_64 rng(20240611);
  for (long p : {2L, 3L, 5L})
    for (int k = 0; k < 20; ++k) c.samples.push_back(corpus::random_sample(rng, 2 + std::size_t(k % 2), p));
  return c;
}

// ---- criterion 3 oracle: cokernel of an integer matrix from its minors ----

struct Cokernel {
  std::size_t free_rank;
  std::vector<Integer> torsion;
};

Cokernel cokernel_by_minors(const IntMatrix& m) {
  // columns of m generate the image in Z^rows
  const std::size_t r = m.rows(), c = m.cols();
  std::vector<Integer> d{1};
  for (std::size_t k = 1; k <= std::min(r, c); ++k) {
    Integer g = 0;
    std::vector<bool> rs(r, false), cs(c, false);
    std::fill(rs.begin(), rs.begin() + long(k), true);
    do {
      std::fill(cs.begin(), cs.end(), false);
      std::fill(cs.begin(), cs.begin() + long(k), true);
      do {
        RatMatrix sub(k, k);
        std::size_t a = 0;
        for (std::size_t i = 0; i < r; ++i) {
          if (!rs[i]) continue;
          std::size_t b = 0;
          for (std::size_t j = 0; j < c; ++j)
            if (cs[j]) sub(a, b++) = Rational(m(i, j));
          ++a;
        }
        Integer det = Rational(exactmath::determinant(sub)).get_num();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), det.get_mpz_t());
      } while (std::prev_permutation(cs.begin(), cs.end()));
    } while (std::prev_permutation(rs.begin(), rs.end()));
    if (g == 0) break;
    d.push_back(g);
  }
  Cokernel out{r - (d.size() - 1), {}};
  for (std::size_t k = 1; k < d.size(); ++k) {
    Integer f = d[k] / d[k - 1];
    if (f > 1) out.torsion.push_back(f);
  }
  return out;
}

// `needle` pieces separated by '*' must occur in order.
bool ledger_has(const cli::Report& rep, const std::string& needle) {
  for (auto& e : rep.ledger) {
    if (!e.pass) continue;
    std::size_t at = 0, from = 0;
    bool found = true;
    while (found && from <= needle.size()) {
      std::size_t star = std::min(needle.find('*', from), needle.size());
      at = e.name.find(needle.substr(from, star - from), at);
      found = at != std::string::npos;
      from = star + 1;
    }
    if (found) return true;
  }
  return false;
}

Outcome example_outcome(const cli::Report& rep, const std::vector<std::string>& required) {
  Outcome o;
  std::size_t golden = 0;
  for (auto& e : rep.ledger) {
    if (e.name.rfind("golden", 0) == 0) ++golden;
    if (!e.pass) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + e.name + (e.witness.empty() ? "" : " [" + e.witness + "]");
    }
  }
  for (auto& r : required)
    if (!ledger_has(rep, r)) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + ("missing check: " + r);
    }
  if (golden == 0) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("no golden values compared");
  }
  if (o.pass) o.detail = std::to_string(rep.ledger.size()) + " checks, " + std::to_string(golden) + " golden values";
  return o;
}

IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t g) {
  IntMatrix T = IntMatrix::identity(g);
  std::uniform_int_distribution<long> c(-2, 2);
  std::uniform_int_distribution<std::size_t> idx(0, g - 1);
  for (int step = 0; step < 8; ++step) {
    std::size_t i = idx(rng), j = idx(rng);
    if (i == j) continue;
    long k = c(rng);
    for (std::size_t r = 0; r < g; ++r) T(r, i) += k * T(r, j);
  }
  return T;
}

} // namespace

int main() {
  cli::Options opt;
  const auto golden = cli::default_golden_dir();
  const Corpus corp = make_corpus();

  criterion(1, "Newton-polygon scale = minimum of [a(L) : a(L) n L] over lattices of p-height <= 2, 60 matrices "
               "(2x2 and 3x3, 20 per p in {2,3,5})",
            "exact equality", 30, [&] {
              Outcome o;
              std::map<std::pair<std::size_t, long>, std::vector<IntMatrix>> families;
              std::size_t evaluated = 0;
              for (auto& s : corp.samples) {
                const std::size_t n = s.alpha.rows();
                auto& fam = families[{n, s.p}];
                if (fam.empty()) fam = height2_lattices(n, s.p);
                long best = -1;
                for (auto& H : fam) {
                  RatMatrix Hq = exactmath::to_rational(H);
                  long e = local_log_index(exactmath::inverse(Hq) * s.alpha * Hq, s.p);
                  ++evaluated;
                  if (best < 0 || e < best) best = e;
                  if (best == 0) break;
                }
                Integer brute = exactmath::ipow(s.p, unsigned(best));
                Integer newton = padic::scale(padic::Automorphism(s.alpha, s.p));
                if (brute != newton) {
                  o.pass = false;
                  o.detail = "p = " + std::to_string(s.p) + ": Newton " + exactmath::to_string(newton) + " vs brute " +
                             exactmath::to_string(brute);
                  return o;
                }
              }
              o.detail = std::to_string(corp.samples.size()) + " matrices, " + std::to_string(evaluated) +
                         " lattice indices, families of " + std::to_string(families[{3, 5}].size()) +
                         " lattices for n = 3, p = 5";
              return o;
            });

  criterion(2, "S2 s(a^n) = s(a)^n for n <= 4; S1 s(a) = s(a^-1) = 1 iff a(V) = V; S3 s(a)/s(a^-1) = p^-v(det a)",
            "exact", 10, [&] {
              Outcome o;
              std::vector<corpus::Sample> all = corp.samples;
              // units on the diagonal: conjugates that normalize P Z^n, so S1's left side holds
              std::mt19937_64 rng(77);
              for (long p : {2L, 3L, 5L})
                for (int k = 0; k < 4; ++k) {
                  auto s = corpus::random_sample(rng, 2 + std::size_t(k % 2), p);
                  RatMatrix d = RatMatrix::identity(s.P.rows());
                  for (std::size_t i = 0; i < d.rows(); ++i) d(i, i) = corpus::unit(rng, p);
                  all.push_back({s.P * d * exactmath::inverse(s.P), s.P, p});
                }
              std::size_t s1_fixed = 0;
              for (auto& s : all) {
                padic::Automorphism a(s.alpha, s.p);
                Integer sa = padic::scale(a), si = padic::scale(a.inverse());
                for (long n = 1; n <= 4; ++n)
                  if (padic::scale(a.pow(n)) != exactmath::ipow(sa, unsigned(n)) ||
                      padic::scale(a.pow(-n)) != exactmath::ipow(si, unsigned(n)))
                    return Outcome{false, "S2 fails at n = " + std::to_string(n)};
                auto L = padic::step1_tidy(a);
                bool unit = sa == 1 && si == 1, fixes = padic::image(a, L) == L;
                if (unit != fixes) return Outcome{false, "S1 fails"};
                if (fixes) ++s1_fixed;
                Rational q = Rational(sa) / Rational(si);
                if (q != exactmath::rpow(s.p, -vp(exactmath::determinant(s.alpha), s.p)))
                  return Outcome{false, "S3 fails"};
              }
              o.detail = std::to_string(all.size()) + " matrices, " + std::to_string(s1_fixed) +
                         " normalize a tidy lattice";
              return o;
            });

  criterion(3, "Example 6.10: M_H = Psi \\ {0}, t = 3, rho = m.x; corank Z for the four-point Psi (minors oracle)",
            "exact", 5, [&] {
              auto rep = cli::run_example("6.10", opt, golden);
              Outcome o = example_outcome(rep, {"Psi1: M_H = Ψ \\ {0}", "Psi2: M_H = Ψ \\ {0}", "Psi1: t = 3",
                                                "Psi2: t = 3", "Psi2: rho functionals", "Psi2: corank = Z"});
              IntMatrix R(3, 2);
              // rows (1,0), (0,1), (1,1): the map Z^2 -> Z^3, i.e. [[1,0,1],[0,1,1]] transposed
              R(0, 0) = 1;
              R(1, 1) = 1;
              R(2, 0) = 1;
              R(2, 1) = 1;
              auto ck = cokernel_by_minors(R);
              auto& got = rep.results["Psi2"]["corank"];
              if (ck.free_rank != 1 || !ck.torsion.empty() || got["free_rank"] != 1 || !got["torsion"].empty()) {
                o.pass = false;
                o.detail += "; oracle free rank " + std::to_string(ck.free_rank) + ", report " + got.dump();
              }
              return o;
            });

  criterion(4, "Example 6.11 at p in {2,3}: f.n. 6, rank 2, corank free of rank 4, root scales max{p^(w_j-w_i),1}, "
               "Iwahori scale p^4 = product of root scales, U_a1+ = U_a U_c U_b mod p^2",
            "exact", 60, [&] {
              auto rep = cli::run_example("6.11", opt, golden);
              std::vector<std::string> req;
              for (std::string p : {"p=2", "p=3"})
                for (std::string c : {"factor number 6", "rank 2", "corank free of rank 4", "root relative scale",
                                      "= p^4", "product of the six root scales", "U_a U_c U_b"})
                  req.push_back(p + ": *" + c);
              Outcome o = example_outcome(rep, req);
              if (o.pass) {
                auto& t = rep.results["p=2"]["corank"]["torsion"];
                o.detail += "; corank torsion " + t.dump() + " also present (see README)";
              }
              return o;
            });

  cli::Options d6 = opt;
  d6.depth = 6;
  criterion(5, "Example 3.5 with F = Z/2 and S3: U tidy for a1, a2 with minimal index; U not tidy for a1^-1 a2 with the "
               "displayed intersection; tidying gives W = a(W), s = 1",
            "exact at depth 6", 30, [&] {
              auto rep = cli::run_example("3.5", d6, golden);
              std::vector<std::string> req;
              for (std::string f : {"Z/2", "S3"})
                for (std::string c : {"U tidy for alpha1", "U tidy for alpha2", "index minimal among Step-1 iterates for alpha1",
                                      "index minimal among Step-1 iterates for alpha2", "U not tidy for alpha1^-1 alpha2",
                                      "U n alpha1^-1 alpha2(U) = {f : f(n, a) = e for n <= 0}", "gives W with alpha(W) = W",
                                      "s(alpha1^-1 alpha2) = 1"})
                  req.push_back(f + ": *" + c);
              return example_outcome(rep, req);
            });

  criterion(6, "Example 5.7: tidiness of alpha_n matches the pi_n criterion on 10 subgroups; common tidy search for "
               "{alpha, alpha_0} exhausted at depths 4, 6, 8 (consistency, not proof)",
            "exact", 60, [&] {
              auto rep = cli::run_example("5.7", opt, golden);
              return example_outcome(rep, {"tidy iff pi_n in {e, <t>, S3} (10 subgroups", "exhausted at depth 4",
                                           "exhausted at depth 6", "exhausted at depth 8"});
            });

  criterion(7, "Example 6.17: phi_1(beta) = 2, phi_2(beta) = 1/2, f.n. 2, rank 1, corank Z", "exact at depth 6", 30, [&] {
    auto rep = cli::run_example("6.17", d6, golden);
    return example_outcome(rep, {"phi_1(beta) = 2 and phi_2(beta) = 1/2", "f.n. = 2", "rank 1", "corank = Z"});
  });

  criterion(8, "identity suite (Cor 4.9, Thm 4.12, Thm 4.14, Prop 5.8, Prop 6.4, Thm 6.12, Delta_V = t_V^rho_V, rho additivity) on "
               "the padic and torus corpora, and invariants under random unimodular rebasing",
            "exact", 60, [&] {
              using namespace invariants;
              std::vector<std::pair<std::string, std::shared_ptr<const Backend>>> backends;
              auto psi_family = [](const std::vector<std::vector<long>>& psi) {
                std::vector<padic::Automorphism> g;
                for (std::size_t k = 0; k < 2; ++k) {
                  RatMatrix a = RatMatrix::identity(psi.size());
                  for (std::size_t i = 0; i < psi.size(); ++i) a(i, i) = exactmath::rpow(3, -psi[i][k]);
                  g.emplace_back(a, 3);
                }
                return std::make_shared<PadicBackend>(g);
              };
              backends.push_back({"6.10 Psi1", psi_family({{0, 0}, {1, 0}, {0, 1}})});
              backends.push_back({"6.10 Psi2", psi_family({{0, 0}, {1, 0}, {0, 1}, {1, 1}})});
              backends.push_back({"padic five-point Psi", psi_family({{0, 0}, {1, 0}, {2, 1}, {-1, 1}, {1, -3}})});
              std::mt19937_64 rng(8);
              for (long p : {2L, 5L}) {
                // commuting conjugates of diagonal matrices
                RatMatrix P = corpus::random_sample(rng, 3, p).P;
                std::vector<padic::Automorphism> g;
                for (int k = 0; k < 2; ++k) {
                  RatMatrix d = RatMatrix::identity(3);
                  for (std::size_t i = 0; i < 3; ++i) d(i, i) = corpus::ppow(p, long(rng() % 5) - 2) * corpus::unit(rng, p);
                  g.emplace_back(P * d * exactmath::inverse(P), p);
                }
                backends.push_back({"padic conjugated p=" + std::to_string(p), std::make_shared<PadicBackend>(g)});
              }
              for (long p : {2L, 3L})
                backends.push_back({"6.11 p=" + std::to_string(p),
                                    std::make_shared<TorusBackend>(3, p, std::vector<torus::Diagonal>{
                                                                             torus::Diagonal({-1, 0, 1}),
                                                                             torus::Diagonal({-1, 1, 0})})});
              backends.push_back({"torus one generator",
                                  std::make_shared<TorusBackend>(3, 2, std::vector<torus::Diagonal>{torus::Diagonal({-1, 0, 1})})});
              backends.push_back({"torus SL4", std::make_shared<TorusBackend>(4, 2, std::vector<torus::Diagonal>{
                                                                                       torus::Diagonal({-1, 0, 0, 1}),
                                                                                       torus::Diagonal({0, -1, 1, 0})})});
              const std::vector<std::string> names = {"Cor 4.9", "Thm 4.12", "Thm 4.14", "Prop 5.8",
                                                      "Prop 6.4", "Thm 6.12", "Delta_V(w) = t_V^rho_V(w)", "rho_V additive"};
              std::size_t checks = 0, rebased = 0;
              for (auto& [label, b] : backends) try {
                auto suite = verify_suite(*b, 4);
                for (auto& n : names) {
                  auto it = std::find_if(suite.begin(), suite.end(), [&](const Check& c) { return c.name.find(n) != std::string::npos; });
                  if (it == suite.end()) return Outcome{false, label + ": " + n + " missing"};
                }
                for (auto& c : suite) {
                  ++checks;
                  if (!c.pass) return Outcome{false, label + ": " + c.name + " [" + c.witness + "]"};
                }
                auto base = compute_invariants(*b, opt.word_len);
                for (int k = 0; k < 5; ++k) {
                  RebasedBackend rb(b, random_unimodular(rng, b->generator_count()));
                  auto inv = compute_invariants(rb, opt.word_len);
                  if (inv.m.points.size() != base.m.points.size() || inv.m.extreme_count != base.m.extreme_count ||
                      inv.rc.rank != base.rc.rank || inv.rc.corank_free != base.rc.corank_free ||
                      inv.rc.corank_torsion != base.rc.corank_torsion)
                    return Outcome{false, label + ": invariants change under rebasing"};
                  for (auto& c : verify_suite(rb, 3)) {
                    ++checks;
                    if (!c.pass) return Outcome{false, label + " rebased: " + c.name + " [" + c.witness + "]"};
                  }
                  ++rebased;
                }
              } catch (const std::exception& e) {
                return Outcome{false, label + ": " + e.what()};
              }
              return Outcome{true, std::to_string(backends.size()) + " groups, " + std::to_string(rebased) +
                                       " rebasings, " + std::to_string(checks) + " checks"};
            });

  criterion(9, "exactmath properties: valuation additivity, polygon degree sum, SNF determinant product, HNF "
               "idempotence",
            "exact, 100 random inputs each", 10, [&] {
              std::mt19937_64 rng(9);
              const long primes[] = {2, 3, 5, 7};
              for (int k = 0; k < 100; ++k) {
                long p = primes[k % 4];
                Rational a = testsupport::random_rational(rng, 200), b = testsupport::random_rational(rng, 200);
                if (a == 0) a = 1;
                if (b == 0) b = p;
                if (vp(a * b, p) != vp(a, p) + vp(b, p)) return Outcome{false, "valuation additivity"};
              }
              for (int k = 0; k < 100; ++k) {
                long p = primes[k % 4];
                std::size_t deg = 1 + std::size_t(k % 7);
                std::vector<Rational> f(deg + 1);
                for (auto& c : f) c = testsupport::random_rational(rng, 50);
                if (f[0] == 0) f[0] = p;
                if (f[deg] == 0) f[deg] = 1;
                auto np = exactmath::newton_polygon(f, p);
                long sum = 0, mult = 0;
                for (auto& s : np.segments) sum += s.length;
                for (auto& [v, m] : np.root_valuations()) mult += m;
                if (sum != long(deg) || mult != long(deg) || np.degree() != long(deg))
                  return Outcome{false, "polygon degree sum"};
              }
              for (int k = 0; k < 100;) {
                auto m = testsupport::random_int_matrix(rng, 4, 4, -9, 9);
                Rational det = exactmath::determinant(exactmath::to_rational(m));
                if (det == 0) continue;
                ++k;
                auto si = exactmath::smith_invariants(m);
                Integer prod = 1;
                for (auto& d : si.factors) prod *= d;
                if (si.rank != 4 || prod != abs(Rational(det).get_num())) return Outcome{false, "SNF determinant product"};
              }
              for (int k = 0; k < 100; ++k) {
                auto m = testsupport::random_int_matrix(rng, 3 + std::size_t(k % 3), 4, -20, 20);
                auto h = exactmath::hermite_form(m);
                if (exactmath::hermite_form(h) != h) return Outcome{false, "HNF idempotence"};
              }
              return Outcome{true, "400 inputs"};
            });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures;
}
