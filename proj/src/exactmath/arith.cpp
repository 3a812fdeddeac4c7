#include <algorithm>
#include <cctype>

#include "tidyscale/exactmath.hpp"

namespace tidyscale::exactmath {

namespace {

bool parse_integer(std::string_view s, Integer& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') i = 1;
  if (i == s.size()) return false;
  for (std::size_t k = i; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  std::string digits(s.substr(i));
  out = Integer(digits, 10);
  if (s[0] == '-') out = -out;
  return true;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

} // namespace

Rational parse_rational(std::string_view s) {
  s = strip(s);
  auto slash = s.find('/');
  Integer num, den(1);
  bool ok;
  if (slash == std::string_view::npos) {
    ok = parse_integer(s, num);
  } else {
    ok = parse_integer(strip(s.substr(0, slash)), num) &&
         parse_integer(strip(s.substr(slash + 1)), den);
  }
  if (!ok) throw InputError("malformed rational '" + std::string(s) + "'");
  if (den == 0) throw InputError("zero denominator in '" + std::string(s) + "'");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }
std::string to_string(const Integer& z) { return z.get_str(10); }

bool is_prime(const Integer& p) {
  return p >= 2 && mpz_probab_prime_p(p.get_mpz_t(), 40) > 0;
}

void require_prime(const Integer& p) {
  if (!is_prime(p)) throw InputError("p = " + to_string(p) + " is not prime");
}

long valuation(const Integer& n, const Integer& p) {
  if (n == 0) throw InputError("valuation of zero");
  Integer t(n);
  long v = static_cast<long>(mpz_remove(t.get_mpz_t(), t.get_mpz_t(), p.get_mpz_t()));
  return v;
}

long valuation(const Rational& q, const Integer& p) {
  return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

std::optional<long> padic_valuation(const Rational& q, const Integer& p) {
  require_prime(p);
  if (q == 0) return std::nullopt;
  return valuation(q, p);
}

Integer ipow(const Integer& p, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), e);
  return r;
}

Rational rpow(const Integer& p, long e) {
  if (e >= 0) return Rational(ipow(p, static_cast<unsigned long>(e)));
  Rational r(Integer(1), ipow(p, static_cast<unsigned long>(-e)));
  r.canonicalize();
  return r;
}

long NewtonPolygon::degree() const {
  long d = 0;
  for (auto& s : segments) d += s.length;
  return d;
}

std::vector<std::pair<Rational, long>> NewtonPolygon::root_valuations() const {
  std::vector<std::pair<Rational, long>> out;
  for (auto& s : segments) out.emplace_back(-s.slope, s.length);
  return out;
}

NewtonPolygon newton_polygon(const std::vector<Rational>& coeffs,
                             const Integer& p) {
  require_prime(p);
  if (coeffs.empty()) throw InputError("empty coefficient list");
  if (coeffs.back() == 0) throw InputError("leading coefficient is zero");
  if (coeffs.front() == 0)
    throw SingularityError("constant coefficient is zero (matrix not invertible)");
  struct Pt {
    long x;
    long y;
  };
  std::vector<Pt> pts;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0) pts.push_back({static_cast<long>(i), valuation(coeffs[i], p)});
  // Monotone chain, lower hull; drop collinear points so slopes strictly rise.
  std::vector<Pt> hull;
  for (auto& q : pts) {
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      Integer cross = Integer(b.x - a.x) * (q.y - a.y) - Integer(b.y - a.y) * (q.x - a.x);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(q);
  }
  NewtonPolygon np;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    Rational s(Integer(hull[i + 1].y - hull[i].y), Integer(hull[i + 1].x - hull[i].x));
    s.canonicalize();
    np.segments.push_back({s, hull[i + 1].x - hull[i].x});
  }
  return np;
}

} // namespace tidyscale::exactmath
