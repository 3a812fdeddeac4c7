#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "tidyscale/exactmath.hpp"

namespace tidyscale::exactmath {

Poly poly_trim(Poly f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
  return f;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return poly_trim(c);
}

Poly poly_sub(const Poly& a, const Poly& b) {
  Poly c(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] -= b[i];
  return poly_trim(c);
}

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
  if (b.empty()) throw InputError("polynomial division by zero");
  Poly r = poly_trim(a);
  if (r.size() < b.size()) return {{}, r};
  Poly q(r.size() - b.size() + 1, Rational(0));
  while (!r.empty() && r.size() >= b.size()) {
    std::size_t shift = r.size() - b.size();
    Rational f = r.back() / b.back();
    q[shift] = f;
    for (std::size_t i = 0; i < b.size(); ++i) r[shift + i] -= f * b[i];
    r = poly_trim(r);
  }
  return {poly_trim(q), r};
}

Poly poly_monic(const Poly& f) {
  Poly g = poly_trim(f);
  if (g.empty()) return g;
  Rational lc = g.back();
  for (auto& c : g) c /= lc;
  return g;
}

Poly poly_gcd(Poly a, Poly b) {
  a = poly_trim(a);
  b = poly_trim(b);
  while (!b.empty()) {
    auto r = poly_divmod(a, b).second;
    a = b;
    b = r;
  }
  return poly_monic(a);
}

Poly poly_derivative(const Poly& f) {
  if (f.size() <= 1) return {};
  Poly d(f.size() - 1);
  for (std::size_t i = 1; i < f.size(); ++i) d[i - 1] = f[i] * static_cast<long>(i);
  return poly_trim(d);
}

Poly poly_pow(const Poly& f, unsigned e) {
  Poly acc{Rational(1)};
  for (unsigned i = 0; i < e; ++i) acc = poly_mul(acc, f);
  return acc;
}

Rational poly_eval(const Poly& f, const Rational& x) {
  Rational acc = 0;
  for (std::size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
  return acc;
}

RatMatrix poly_eval(const Poly& f, const RatMatrix& m) {
  const std::size_t n = m.rows();
  RatMatrix acc(n, n);
  for (std::size_t i = f.size(); i-- > 0;) {
    acc = acc * m;
    for (std::size_t k = 0; k < n; ++k) acc(k, k) += f[i];
  }
  return acc;
}

std::string poly_to_string(const Poly& f) {
  if (f.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = f.size(); i-- > 0;) {
    if (f[i] == 0) continue;
    Rational c = f[i];
    bool neg = c < 0;
    if (neg) c = -c;
    if (first) os << (neg ? "-" : "");
    else os << (neg ? " - " : " + ");
    first = false;
    if (i == 0 || c != 1) os << c.get_str();
    if (i >= 1) os << (i == 0 || c != 1 ? "*" : "") << "x";
    if (i >= 2) os << "^" << i;
  }
  return os.str();
}

Poly charpoly(const RatMatrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw InputError("characteristic polynomial of non-square matrix");
  // Faddeev-LeVerrier
  Poly c(n + 1, Rational(0));
  c[n] = 1;
  RatMatrix M(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    M = a * M;
    for (std::size_t i = 0; i < n; ++i) M(i, i) += c[n - k + 1];
    RatMatrix AM = a * M;
    Rational tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += AM(i, i);
    c[n - k] = -tr / static_cast<long>(k);
  }
  return c;
}

namespace {

using ZPoly = std::vector<Integer>;

// Primitive integer multiple with positive leading coefficient.
ZPoly to_primitive(const Poly& f) {
  Integer l = 1;
  for (auto& c : f) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  ZPoly z;
  for (auto& c : f) z.push_back(Integer(c * l));
  Integer g = 0;
  for (auto& c : z) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  if (z.back() < 0) g = -g;
  for (auto& c : z) c /= g;
  return z;
}

Poly to_poly(const ZPoly& z) {
  Poly f;
  for (auto& c : z) f.emplace_back(c);
  return f;
}

Integer zeval(const ZPoly& f, const Integer& x) {
  Integer acc = 0;
  for (std::size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
  return acc;
}

Integer pollard_rho(const Integer& n) {
  if (n % 2 == 0) return 2;
  for (unsigned long c = 1;; ++c) {
    Integer x = 2, y = 2, d = 1;
    auto f = [&](const Integer& v) { return Integer((v * v + c) % n); };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      Integer diff = x - y;
      mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
    }
    if (d != n) return d;
  }
}

void factor_into(Integer n, std::map<Integer, unsigned>& out) {
  if (n < 0) n = -n;
  for (unsigned long q = 2; q < 10000 && Integer(q) * q <= n; ++q)
    while (n % q == 0) {
      out[Integer(q)]++;
      n /= q;
    }
  if (n == 1) return;
  if (is_prime(n)) {
    out[n]++;
    return;
  }
  if (n < Integer(10000) * 10000) {
    out[n]++; // no factor below 10^4 and below 10^8: prime
    return;
  }
  Integer d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

std::vector<Integer> positive_divisors(const Integer& n) {
  std::map<Integer, unsigned> f;
  factor_into(n, f);
  std::vector<Integer> divs{Integer(1)};
  for (auto& [q, e] : f) {
    std::size_t base = divs.size();
    Integer pw = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pw *= q;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pw);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

// Exact division over Z, or nullopt.
std::optional<ZPoly> zdivide(const ZPoly& a, const ZPoly& b) {
  auto [q, r] = poly_divmod(to_poly(a), to_poly(b));
  if (!r.empty()) return std::nullopt;
  ZPoly z;
  for (auto& c : q) {
    if (c.get_den() != 1) return std::nullopt;
    z.push_back(c.get_num());
  }
  return z;
}

// One nontrivial integer factor of degree d of primitive f, by Kronecker's
// interpolation search.
std::optional<ZPoly> kronecker_factor(const ZPoly& f, std::size_t d) {
  struct Sample {
    Integer x;
    std::vector<Integer> divs;
  };
  std::vector<Sample> samples;
  for (long k = 0; samples.size() < d + 6 && k < 200; ++k) {
    Integer x = (k % 2 == 0) ? Integer(k / 2) : Integer(-(k + 1) / 2);
    Integer v = zeval(f, x);
    if (v == 0) continue;
    samples.push_back({x, positive_divisors(v)});
  }
  if (samples.size() < d + 1) return std::nullopt;
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.divs.size() < b.divs.size(); });
  samples.resize(d + 1);
  // Lagrange basis over the chosen points.
  std::vector<Poly> basis;
  for (std::size_t i = 0; i <= d; ++i) {
    Poly L{Rational(1)};
    Rational denom = 1;
    for (std::size_t j = 0; j <= d; ++j) {
      if (j == i) continue;
      L = poly_mul(L, Poly{Rational(-samples[j].x), Rational(1)});
      denom *= Rational(samples[i].x - samples[j].x);
    }
    for (auto& c : L) c /= denom;
    basis.push_back(L);
  }
  double combos = 1;
  for (std::size_t i = 0; i <= d; ++i) combos *= samples[i].divs.size() * (i ? 2.0 : 1.0);
  if (combos > 2e7) throw ResourceError("polynomial factorization search too large", combos);
  std::vector<std::size_t> idx(d + 1, 0);
  std::vector<int> sign(d + 1, 1);
  for (;;) {
    Poly g(d + 1, Rational(0));
    for (std::size_t i = 0; i <= d; ++i) {
      Integer y = samples[i].divs[idx[i]] * sign[i];
      for (std::size_t k = 0; k < basis[i].size(); ++k) g[k] += basis[i][k] * y;
    }
    g = poly_trim(g);
    if (g.size() == d + 1) {
      bool integral = std::all_of(g.begin(), g.end(), [](const Rational& c) { return c.get_den() == 1; });
      if (integral && f.back() % g.back().get_num() == 0) {
        ZPoly gz;
        for (auto& c : g) gz.push_back(c.get_num());
        if (zdivide(f, gz)) return gz;
      }
    }
    // odometer over divisor choices and signs (first point sign fixed)
    std::size_t pos = 0;
    for (; pos <= d; ++pos) {
      if (pos > 0 && sign[pos] == 1) {
        sign[pos] = -1;
        break;
      }
      sign[pos] = 1;
      if (++idx[pos] < samples[pos].divs.size()) break;
      idx[pos] = 0;
    }
    if (pos > d) return std::nullopt;
  }
}

void irreducible_into(const ZPoly& f, std::vector<ZPoly>& out) {
  if (f.size() <= 2) {
    out.push_back(f);
    return;
  }
  // rational roots first
  for (auto& a : positive_divisors(f.front()))
    for (auto& b : positive_divisors(f.back()))
      for (int s : {1, -1}) {
        Integer g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        if (g != 1) continue;
        ZPoly lin{Integer(-a * s), b};
        if (auto q = zdivide(f, lin)) {
          out.push_back(lin);
          irreducible_into(*q, out);
          return;
        }
      }
  const std::size_t n = f.size() - 1;
  for (std::size_t d = 2; d <= n / 2; ++d)
    if (auto g = kronecker_factor(f, d)) {
      irreducible_into(*g, out);
      irreducible_into(*zdivide(f, *g), out);
      return;
    }
  out.push_back(f);
}

} // namespace

std::vector<std::pair<Poly, unsigned>> factor_rational(const Poly& f0) {
  Poly f = poly_monic(f0);
  if (f.empty()) throw InputError("cannot factor the zero polynomial");
  std::map<std::vector<std::string>, std::pair<Poly, unsigned>> acc;
  auto add = [&](const Poly& g, unsigned m) {
    Poly h = poly_monic(g);
    std::vector<std::string> key;
    key.push_back(std::to_string(h.size()));
    for (auto& c : h) key.push_back(c.get_str());
    auto it = acc.find(key);
    if (it == acc.end()) acc[key] = {h, m};
    else it->second.second += m;
  };
  if (f.size() == 1) return {};
  // Yun square-free decomposition
  Poly fp = poly_derivative(f);
  Poly a = poly_gcd(f, fp);
  Poly b = poly_divmod(f, a).first;
  Poly c = poly_divmod(fp, a).first;
  Poly d = poly_sub(c, poly_derivative(b));
  for (unsigned i = 1; b.size() > 1; ++i) {
    Poly ai = poly_gcd(b, d);
    if (ai.size() > 1) {
      std::vector<ZPoly> irr;
      irreducible_into(to_primitive(ai), irr);
      for (auto& g : irr) add(to_poly(g), i);
    }
    b = poly_divmod(b, ai).first;
    c = poly_divmod(d, ai).first;
    d = poly_sub(c, poly_derivative(b));
  }
  std::vector<std::pair<Poly, unsigned>> out;
  for (auto& [k, v] : acc) out.push_back(v);
  std::sort(out.begin(), out.end(), [](auto& x, auto& y) {
    if (x.first.size() != y.first.size()) return x.first.size() < y.first.size();
    for (std::size_t i = 0; i < x.first.size(); ++i)
      if (x.first[i] != y.first[i]) return x.first[i] < y.first[i];
    return x.second < y.second;
  });
  return out;
}

} // namespace tidyscale::exactmath
