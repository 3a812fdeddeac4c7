#include <algorithm>
#include <cstdint>
#include <sstream>
#include <unordered_set>

#include "tidyscale/torus.hpp"

namespace tidyscale::torus {

using namespace exactmath;

namespace {

long add_bound(long b, long delta) { return b >= kAbsent ? kAbsent : b + delta; }

std::string bound_str(long b) { return b >= kAbsent ? "inf" : std::to_string(b); }

} // namespace

Pattern::Pattern(std::vector<std::vector<long>> bounds) : m_(std::move(bounds)) {
  const std::size_t n = m_.size();
  if (n == 0) throw InputError("empty pattern");
  for (auto& row : m_)
    if (row.size() != n) throw InputError("pattern bounds must be square");
  for (std::size_t i = 0; i < n; ++i)
    if (m_[i][i] != 0) throw InputError("pattern diagonal bounds must be 0");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (m_[i][j] >= kAbsent || m_[j][k] >= kAbsent) continue;
        if (m_[i][k] > m_[i][j] + m_[j][k])
          throw InputError("pattern is not closed under multiplication at (" + std::to_string(i + 1) + "," +
                           std::to_string(k + 1) + ")");
      }
}

Pattern Pattern::iwahori(std::size_t n) {
  std::vector<std::vector<long>> b(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) b[i][j] = 1;
  return Pattern(b);
}

bool Pattern::subset_of(const Pattern& o) const {
  if (n() != o.n()) return false;
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < n(); ++j)
      if (m_[i][j] < o.m_[i][j]) return false;
  return true;
}

std::string Pattern::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < n(); ++i) {
    os << (i ? ", " : "") << "[";
    for (std::size_t j = 0; j < n(); ++j) os << (j ? "," : "") << bound_str(m_[i][j]);
    os << "]";
  }
  os << "]";
  return os.str();
}

Diagonal::Diagonal(std::vector<long> v) : w(std::move(v)) {
  long s = 0;
  for (long x : w) s += x;
  if (w.empty()) throw InputError("empty diagonal automorphism");
  if (s != 0) throw InputError("diagonal valuations must sum to 0 (determinant 1)");
}

Diagonal Diagonal::operator+(const Diagonal& o) const {
  if (w.size() != o.w.size()) throw InputError("diagonal size mismatch");
  std::vector<long> r(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[i] + o.w[i];
  return Diagonal(r);
}

Diagonal Diagonal::operator*(long k) const {
  std::vector<long> r(w);
  for (auto& x : r) x *= k;
  return Diagonal(r);
}

Pattern conjugate(const Pattern& pat, const Diagonal& d) {
  if (d.w.size() != pat.n()) throw InputError("conjugate: size mismatch");
  auto b = pat.bounds();
  for (std::size_t i = 0; i < pat.n(); ++i)
    for (std::size_t j = 0; j < pat.n(); ++j)
      if (i != j) b[i][j] = add_bound(b[i][j], d.w[i] - d.w[j]);
  return Pattern(b);
}

Pattern intersect(const Pattern& a, const Pattern& b) {
  if (a.n() != b.n()) throw InputError("intersect: size mismatch");
  auto m = a.bounds();
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = 0; j < a.n(); ++j) m[i][j] = std::max(m[i][j], b.at(i, j));
  return Pattern(m);
}

Integer pattern_index(const Pattern& p, const Pattern& q, const Integer& prime) {
  require_prime(prime);
  if (!p.subset_of(q)) throw CommensurabilityError("pattern_index: first pattern not contained in second");
  long e = 0;
  for (std::size_t i = 0; i < p.n(); ++i)
    for (std::size_t j = 0; j < p.n(); ++j) {
      if (i == j || p.at(i, j) == q.at(i, j)) continue;
      if (p.at(i, j) >= kAbsent) throw CommensurabilityError("pattern_index: infinite index");
      e += p.at(i, j) - q.at(i, j);
    }
  return ipow(prime, static_cast<unsigned long>(e));
}

Integer scale(const Diagonal& d, const Pattern& pat, const Integer& prime) {
  Pattern img = conjugate(pat, d);
  return pattern_index(intersect(img, pat), img, prime);
}

std::string Root::label() const { return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")"; }

std::vector<Root> roots(std::size_t n) {
  std::vector<Root> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.push_back({i, j});
  return out;
}

Rational root_modulus(const Root& r, const Diagonal& d, const Integer& prime) {
  return rpow(prime, d.w.at(r.j) - d.w.at(r.i));
}

Integer root_relative_scale(const Root& r, const Diagonal& d, const Integer& prime) {
  Rational m = root_modulus(r, d, prime);
  return m > 1 ? m.get_num() : Integer(1);
}

std::vector<RootEigenfactor> root_eigenfactors(std::size_t n) {
  if (n < 2) throw InputError("root eigenfactors need n >= 2");
  std::vector<RootEigenfactor> out;
  for (auto& r : roots(n)) {
    std::vector<long> f(n, 0);
    f[r.j] += 1;
    f[r.i] -= 1;
    out.push_back({r, f, "U_0 * {I + x E" + r.label() + "}"});
  }
  return out;
}

namespace {

// Matrices over Z/M packed into 64 bits.
class Quotient {
public:
  Quotient(std::size_t n, long modulus) : n_(n), M_(modulus) {
    bits_ = 1;
    while ((1L << bits_) < M_) ++bits_;
    if (static_cast<long>(n * n) * bits_ > 64)
      throw ResourceError("congruence quotient does not fit the packed representation", static_cast<double>(M_));
  }
  using Key = std::uint64_t;
  using Mat = std::vector<long>;

  Key pack(const Mat& a) const {
    Key k = 0;
    for (std::size_t i = 0; i < n_ * n_; ++i) k |= static_cast<Key>(a[i]) << (bits_ * i);
    return k;
  }
  Mat unpack(Key k) const {
    Mat a(n_ * n_);
    Key mask = (Key(1) << bits_) - 1;
    for (std::size_t i = 0; i < n_ * n_; ++i) a[i] = static_cast<long>((k >> (bits_ * i)) & mask);
    return a;
  }
  Key mul(Key x, Key y) const {
    Mat a = unpack(x), b = unpack(y), c(n_ * n_, 0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < n_; ++k) {
        long aik = a[i * n_ + k];
        if (!aik) continue;
        for (std::size_t j = 0; j < n_; ++j) c[i * n_ + j] = (c[i * n_ + j] + aik * b[k * n_ + j]) % M_;
      }
    return pack(c);
  }
  long det(const Mat& a) const {
    // cofactor expansion; n is tiny
    return det_rec(a, n_);
  }
  std::string show(Key k) const {
    Mat a = unpack(k);
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < n_; ++i) {
      os << (i ? ", " : "") << "[";
      for (std::size_t j = 0; j < n_; ++j) os << (j ? "," : "") << a[i * n_ + j];
      os << "]";
    }
    os << "] mod " << M_;
    return os.str();
  }
  long modulus() const { return M_; }
  std::size_t n() const { return n_; }

private:
  long det_rec(const Mat& a, std::size_t m) const {
    if (m == 1) return a[0] % M_;
    long acc = 0;
    for (std::size_t c = 0; c < m; ++c) {
      if (!a[c]) continue;
      Mat sub;
      for (std::size_t r = 1; r < m; ++r)
        for (std::size_t cc = 0; cc < m; ++cc)
          if (cc != c) sub.push_back(a[r * m + cc]);
      long term = a[c] * det_rec(sub, m - 1) % M_;
      acc = (c % 2 == 0) ? acc + term : acc - term;
      acc %= M_;
    }
    return (acc % M_ + M_) % M_;
  }
  std::size_t n_;
  long M_;
  int bits_;
};

long ipow_long(long p, long e) {
  long r = 1;
  for (long i = 0; i < e; ++i) r *= p;
  return r;
}

// Residues mod p^k of Z_p elements of valuation >= b.
std::vector<long> residues(long b, long p, long k) {
  long M = ipow_long(p, k);
  if (b >= k) return {0};
  long step = b <= 0 ? 1 : ipow_long(p, b);
  std::vector<long> out;
  for (long x = 0; x < M; x += step) out.push_back(x);
  return out;
}

// All matrices mod p^k with entrywise choices, filtered by det == 1.
std::vector<Quotient::Key> enumerate(const Quotient& Q, const std::vector<std::vector<long>>& choices,
                                     double cap) {
  double cand = 1;
  for (auto& c : choices) cand *= static_cast<double>(c.size());
  long M = Q.modulus();
  // units are a phi(M)/M share of residues; det == 1 picks one unit value
  double phi = static_cast<double>(M);
  for (long q = 2; q <= M; ++q)
    if (M % q == 0) {
      bool prime = true;
      for (long r = 2; r * r <= q; ++r)
        if (q % r == 0) prime = false;
      if (prime) phi = phi / static_cast<double>(q) * static_cast<double>(q - 1);
    }
  double estimate = cand / std::max(1.0, phi);
  if (estimate > cap || cand > 64 * cap)
    throw ResourceError("congruence quotient exceeds the enumeration cap", estimate);
  std::vector<Quotient::Key> out;
  const std::size_t N = choices.size();
  std::vector<std::size_t> idx(N, 0);
  Quotient::Mat a(N);
  for (;;) {
    for (std::size_t i = 0; i < N; ++i) a[i] = choices[i][idx[i]];
    if (Q.det(a) == 1 % M) out.push_back(Q.pack(a));
    std::size_t pos = 0;
    while (pos < N && ++idx[pos] == choices[pos].size()) idx[pos++] = 0;
    if (pos == N) break;
  }
  return out;
}

std::vector<std::vector<long>> u_choices(const Pattern& u, long p, long k) {
  std::vector<std::vector<long>> ch;
  for (std::size_t i = 0; i < u.n(); ++i)
    for (std::size_t j = 0; j < u.n(); ++j) ch.push_back(residues(u.at(i, j), p, k));
  return ch;
}

std::vector<Quotient::Key> factor_image(const Quotient& Q, const Pattern& u, const Factor& f, long p, long k,
                                        double cap) {
  const std::size_t n = u.n();
  std::vector<std::vector<long>> ch(n * n, std::vector<long>{0});
  if (f.diagonal) {
    for (std::size_t i = 0; i < n; ++i) ch[i * n + i] = residues(0, p, k);
  } else {
    for (std::size_t i = 0; i < n; ++i) ch[i * n + i] = {1 % Q.modulus()};
    for (auto& r : f.roots)
      if (u.at(r.i, r.j) < kAbsent) ch[r.i * n + r.j] = residues(u.at(r.i, r.j), p, k);
  }
  return enumerate(Q, ch, cap);
}

} // namespace

ProductCheck ordered_product_check(const Pattern& u, const std::vector<Factor>& factors,
                                   const Integer& prime, unsigned level, double cap) {
  require_prime(prime);
  if (level < 1) throw InputError("congruence level must be >= 1");
  if (!prime.fits_slong_p()) throw ResourceError("prime too large for the congruence quotient", prime.get_d());
  long p = prime.get_si(), k = level;
  double M = 1;
  for (long i = 0; i < k; ++i) M *= static_cast<double>(p);
  if (M > 127) throw ResourceError("p^k too large for the congruence quotient", M);
  Quotient Q(u.n(), ipow_long(p, k));

  ProductCheck out;
  auto image = enumerate(Q, u_choices(u, p, k), cap);
  std::unordered_set<Quotient::Key> img(image.begin(), image.end());
  out.image_size = img.size();

  Quotient::Mat id(u.n() * u.n(), 0);
  for (std::size_t i = 0; i < u.n(); ++i) id[i * u.n() + i] = 1 % Q.modulus();
  std::unordered_set<Quotient::Key> prod{Q.pack(id)};
  for (auto& f : factors) {
    out.order.push_back(f.label);
    auto fi = factor_image(Q, u, f, p, k, cap);
    std::unordered_set<Quotient::Key> next;
    for (auto x : prod)
      for (auto y : fi) {
        auto z = Q.mul(x, y);
        if (!img.count(z)) {
          out.witness = "product element " + Q.show(z) + " lies outside the image of U";
          out.product_size = next.size();
          return out;
        }
        next.insert(z);
      }
    prod = std::move(next);
  }
  out.product_size = prod.size();
  out.pass = prod.size() == img.size();
  if (!out.pass)
    for (auto x : image)
      if (!prod.count(x)) {
        out.witness = "image element " + Q.show(x) + " is not in the ordered product";
        break;
      }
  return out;
}

HalvingCheck halving_factorization_check(const Pattern& u, const std::vector<Diagonal>& seq,
                                         const Integer& prime, unsigned level, double cap) {
  HalvingCheck out;
  for (auto& d : seq)
    if (d.w.size() != u.n()) throw InputError("halving check: size mismatch");
  bool trivial = std::all_of(seq.begin(), seq.end(), [](const Diagonal& d) {
    return std::all_of(d.w.begin(), d.w.end(), [](long x) { return x == 0; });
  });
  if (trivial) {
    // every sign pattern gives U itself: the factoring is the single factor U
    out.pass = true;
    out.front.pass = true;
    out.front.order = {"U"};
    out.u0_positions_passing = {0};
    out.order = {"U"};
    return out;
  }
  const std::size_t T = seq.size();
  std::vector<Factor> unipotent;
  // lexicographic over {-1, 1}^T with -1 < 1
  for (std::size_t mask = 0; mask < (std::size_t(1) << T); ++mask) {
    std::string label = "(";
    std::vector<int> eps(T);
    for (std::size_t t = 0; t < T; ++t) {
      eps[t] = (mask >> (T - 1 - t)) & 1 ? 1 : -1;
      label += (t ? "," : "") + std::string(eps[t] > 0 ? "+" : "-");
    }
    label += ")";
    Factor f{label, false, {}};
    for (auto& r : roots(u.n())) {
      if (u.at(r.i, r.j) >= kAbsent) continue;
      bool ok = true;
      for (std::size_t t = 0; t < T && ok; ++t) ok = eps[t] * (seq[t].w[r.j] - seq[t].w[r.i]) >= 0;
      if (ok) f.roots.push_back(r);
    }
    out.order.push_back(label);
    if (!f.roots.empty()) {
      std::string rl;
      for (auto& r : f.roots) rl += r.label();
      f.label = label + rl;
      unipotent.push_back(f);
    }
  }
  for (std::size_t pos = 0; pos <= unipotent.size(); ++pos) {
    std::vector<Factor> fs = unipotent;
    fs.insert(fs.begin() + static_cast<long>(pos), Factor{"U_0", true, {}});
    auto res = ordered_product_check(u, fs, prime, level, cap);
    if (res.pass) out.u0_positions_passing.push_back(pos);
    if (pos == 0) out.front = res;
  }
  out.pass = out.front.pass;
  return out;
}

} // namespace tidyscale::torus
