#include <algorithm>
#include <array>
#include <set>
#include <numeric>
#include <sstream>

#include "tidyscale/finprod.hpp"

namespace tidyscale::finprod {

FiniteGroup::FiniteGroup(std::vector<std::string> names, std::vector<std::vector<Elem>> table)
    : names_(std::move(names)), table_(std::move(table)) {
  const std::size_t n = names_.size();
  if (n == 0 || n > 64) throw InputError("finite group order must be between 1 and 64");
  if (table_.size() != n) throw InputError("multiplication table has the wrong number of rows");
  for (auto& row : table_) {
    if (row.size() != n) throw InputError("multiplication table row has the wrong length");
    for (Elem x : row)
      if (x >= n) throw InputError("multiplication table entry out of range");
  }
  bool found = false;
  for (std::size_t e = 0; e < n && !found; ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) ok = table_[e][x] == x && table_[x][e] == x;
    if (ok) {
      id_ = static_cast<Elem>(e);
      found = true;
    }
  }
  if (!found) throw InputError("multiplication table has no identity");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
          throw InputError("multiplication table is not associative");
  inv_.assign(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    bool ok = false;
    for (std::size_t b = 0; b < n && !ok; ++b)
      if (table_[a][b] == id_ && table_[b][a] == id_) {
        inv_[a] = static_cast<Elem>(b);
        ok = true;
      }
    if (!ok) throw InputError("element " + names_[a] + " has no inverse");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (names_[i] == names_[j]) throw InputError("duplicate element name " + names_[i]);
}

FiniteGroup FiniteGroup::cyclic(unsigned n) {
  if (n == 0) throw InputError("cyclic group of order 0");
  std::vector<std::string> names;
  std::vector<std::vector<Elem>> t(n, std::vector<Elem>(n));
  for (unsigned i = 0; i < n; ++i) {
    names.push_back(std::to_string(i));
    for (unsigned j = 0; j < n; ++j) t[i][j] = static_cast<Elem>((i + j) % n);
  }
  return FiniteGroup(names, t);
}

namespace {

using P3 = std::array<int, 3>;

P3 pcompose(const P3& a, const P3& b) { return {a[b[0]], a[b[1]], a[b[2]]}; }

} // namespace

FiniteGroup FiniteGroup::s3() {
  // images of (1,2,3), zero-based
  const std::vector<P3> perms = {{0, 1, 2}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}};
  const std::vector<std::string> names = {"e", "s1", "s2", "s3", "t", "t2"};
  std::vector<std::vector<Elem>> t(6, std::vector<Elem>(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      P3 c = pcompose(perms[i], perms[j]);
      t[i][j] = static_cast<Elem>(std::find(perms.begin(), perms.end(), c) - perms.begin());
    }
  return FiniteGroup(names, t);
}

FiniteGroup FiniteGroup::e8() {
  // c1^x c2^y a^z at index x + 2y + 4z; a conjugates c1 <-> c2
  std::vector<std::string> names;
  for (int i = 0; i < 8; ++i) {
    std::string s;
    if (i & 1) s += "c1";
    if (i & 2) s += "c2";
    if (i & 4) s += "a";
    names.push_back(s.empty() ? "e" : s);
  }
  std::vector<std::vector<Elem>> t(8, std::vector<Elem>(8));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      int x = i & 1, y = (i >> 1) & 1, z = i >> 2;
      int u = j & 1, v = (j >> 1) & 1, w = j >> 2;
      if (z) std::swap(u, v);
      t[i][j] = static_cast<Elem>((x ^ u) | ((y ^ v) << 1) | ((z ^ w) << 2));
    }
  return FiniteGroup(names, t);
}

Elem FiniteGroup::by_name(const std::string& s) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == s) return static_cast<Elem>(i);
  throw InputError("unknown group element " + s);
}

Mask FiniteGroup::full() const { return order() == 64 ? ~Mask(0) : (Mask(1) << order()) - 1; }

Mask FiniteGroup::generated(const std::vector<Elem>& gens) const {
  Mask m = trivial();
  for (bool grew = true; grew;) {
    grew = false;
    for (unsigned x = 0; x < order(); ++x) {
      if (!(m >> x & 1)) continue;
      for (Elem g : gens) {
        Elem y = mul(static_cast<Elem>(x), g);
        if (!(m >> y & 1)) {
          m |= Mask(1) << y;
          grew = true;
        }
      }
    }
  }
  return m;
}

bool FiniteGroup::is_subgroup(Mask m) const {
  if (!(m & trivial()) || (m & ~full())) return false;
  for (unsigned a = 0; a < order(); ++a) {
    if (!(m >> a & 1)) continue;
    for (unsigned b = 0; b < order(); ++b)
      if ((m >> b & 1) && !(m >> mul(static_cast<Elem>(a), inv(static_cast<Elem>(b))) & 1)) return false;
  }
  return true;
}

std::string FiniteGroup::mask_to_string(Mask m) const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (unsigned x = 0; x < order(); ++x)
    if (m >> x & 1) {
      os << (first ? "" : ",") << names_[x];
      first = false;
    }
  os << "}";
  return os.str();
}

Perm FiniteGroup::identity_perm() const {
  Perm p(order());
  std::iota(p.begin(), p.end(), Elem(0));
  return p;
}

Perm FiniteGroup::conjugation(Elem g) const {
  Perm p(order());
  for (unsigned x = 0; x < order(); ++x) p[x] = mul(mul(g, static_cast<Elem>(x)), inv(g));
  return p;
}

bool FiniteGroup::is_automorphism(const Perm& p) const {
  if (p.size() != order()) return false;
  Mask seen = 0;
  for (Elem x : p) {
    if (x >= order()) return false;
    seen |= Mask(1) << x;
  }
  if (seen != full()) return false;
  for (unsigned a = 0; a < order(); ++a)
    for (unsigned b = 0; b < order(); ++b)
      if (p[mul(static_cast<Elem>(a), static_cast<Elem>(b))] != mul(p[a], p[b])) return false;
  return true;
}

Mask FiniteGroup::apply(const Perm& p, Mask m) {
  Mask out = 0;
  for (std::size_t x = 0; x < p.size(); ++x)
    if (m >> x & 1) out |= Mask(1) << p[x];
  return out;
}

Perm compose(const Perm& a, const Perm& b) {
  Perm c(b.size());
  for (std::size_t x = 0; x < b.size(); ++x) c[x] = a[b[x]];
  return c;
}

Perm invert(const Perm& a) {
  Perm c(a.size());
  for (std::size_t x = 0; x < a.size(); ++x) c[a[x]] = static_cast<Elem>(x);
  return c;
}

Ambient::Ambient(FiniteGroup f, unsigned r, Mask tl, Mask tr) : F(std::move(f)), fiber(r), TL(tl), TR(tr) {
  if (fiber == 0) throw InputError("fiber size must be positive");
  if (!F.is_subgroup(TL)) throw InputError("left tail constraint is not a subgroup");
  if (!F.is_subgroup(TR)) throw InputError("right tail constraint is not a subgroup");
}

long Ambient::block(long c) const {
  long r = static_cast<long>(fiber);
  return c >= 0 ? c / r : -((-c + r - 1) / r);
}

long Ambient::offset(long c) const { return c - block(c) * static_cast<long>(fiber); }

long Ambient::coord(long n, long a) const {
  if (a < 0 || a >= static_cast<long>(fiber)) throw InputError("fiber index out of range");
  return n * static_cast<long>(fiber) + a;
}

// ---- automorphisms ----

Automorphism::Automorphism(const Ambient& amb, long d, std::vector<unsigned> pi, Perm phi,
                           std::map<long, Perm> twists)
    : d_(d), pi_(std::move(pi)), phi_(std::move(phi)), tw_(std::move(twists)) {
  if (pi_.size() != amb.fiber) throw InputError("fiber permutation has the wrong size");
  std::vector<bool> hit(pi_.size(), false);
  for (unsigned x : pi_) {
    if (x >= pi_.size() || hit[x]) throw InputError("fiber map is not a permutation");
    hit[x] = true;
  }
  if (!amb.F.is_automorphism(phi_)) throw InputError("global map is not an automorphism of the fiber group");
  if (FiniteGroup::apply(phi_, amb.TL) != amb.TL || FiniteGroup::apply(phi_, amb.TR) != amb.TR)
    throw InputError("global automorphism does not preserve the tail constraints");
  for (auto& [s, t] : tw_)
    if (!amb.F.is_automorphism(t)) throw InputError("local twist at " + std::to_string(s) + " is not an automorphism");
  normalize();
}

Automorphism Automorphism::identity(const Ambient& amb) { return shift(amb, 0); }

Automorphism Automorphism::shift(const Ambient& amb, long d) {
  std::vector<unsigned> pi(amb.fiber);
  std::iota(pi.begin(), pi.end(), 0u);
  return Automorphism(amb, d, pi, amb.F.identity_perm(), {});
}

void Automorphism::normalize() {
  for (auto it = tw_.begin(); it != tw_.end();) {
    bool id = true;
    for (std::size_t x = 0; x < it->second.size() && id; ++x) id = it->second[x] == x;
    it = id ? tw_.erase(it) : std::next(it);
  }
}

namespace {

long floordiv(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

} // namespace

long Automorphism::source(long t) const {
  long r = static_cast<long>(pi_.size());
  long n = floordiv(t, r), a = t - n * r;
  return (n + d_) * r + pi_[static_cast<std::size_t>(a)];
}

long Automorphism::target(long s) const {
  long r = static_cast<long>(pi_.size());
  long n = floordiv(s, r), b = s - n * r;
  long a = std::find(pi_.begin(), pi_.end(), static_cast<unsigned>(b)) - pi_.begin();
  return (n - d_) * r + a;
}

Perm Automorphism::A(long s) const {
  auto it = tw_.find(s);
  return it == tw_.end() ? phi_ : compose(phi_, it->second);
}

Elem Automorphism::act(long s, Elem x) const {
  auto it = tw_.find(s);
  return phi_[it == tw_.end() ? x : it->second[x]];
}

std::optional<std::pair<long, long>> Automorphism::twist_range() const {
  if (tw_.empty()) return std::nullopt;
  return std::make_pair(tw_.begin()->first, tw_.rbegin()->first);
}

Automorphism Automorphism::operator*(const Automorphism& o) const {
  if (pi_.size() != o.pi_.size() || phi_.size() != o.phi_.size())
    throw InputError("composing automorphisms of different ambient groups");
  // sigma = o.sigma after this->sigma; A_s = A_{o.target(s)} o o.A_s
  Automorphism c;
  c.d_ = d_ + o.d_;
  c.pi_.resize(pi_.size());
  for (std::size_t a = 0; a < pi_.size(); ++a) c.pi_[a] = o.pi_[pi_[a]];
  c.phi_ = compose(phi_, o.phi_);
  const Perm phib_inv = invert(o.phi_);
  std::set<long> keys;
  for (auto& [s, t] : o.tw_) keys.insert(s);
  for (auto& [s, t] : tw_) keys.insert(o.source(s));
  for (long s : keys) {
    auto ia = tw_.find(o.target(s));
    auto ib = o.tw_.find(s);
    Perm id(phi_.size());
    std::iota(id.begin(), id.end(), Elem(0));
    const Perm& ta = ia == tw_.end() ? id : ia->second;
    const Perm& tb = ib == o.tw_.end() ? id : ib->second;
    // tau_s = phib^-1 tau^a_{o.target(s)} phib tau^b_s
    c.tw_[s] = compose(phib_inv, compose(ta, compose(o.phi_, tb)));
  }
  c.normalize();
  return c;
}

Automorphism Automorphism::inverse() const {
  Automorphism c;
  c.d_ = -d_;
  c.pi_.resize(pi_.size());
  for (std::size_t a = 0; a < pi_.size(); ++a) c.pi_[pi_[a]] = static_cast<unsigned>(a);
  c.phi_ = invert(phi_);
  // tau'_s = phi tau_{sigma(s)}^-1 phi^-1
  for (auto& [s, t] : tw_) c.tw_[target(s)] = compose(phi_, compose(invert(t), c.phi_));
  c.normalize();
  return c;
}

Automorphism Automorphism::pow(long e) const {
  Automorphism base = e < 0 ? inverse() : *this;
  Automorphism acc = base;
  // identity with matching shape
  acc.d_ = 0;
  std::iota(acc.pi_.begin(), acc.pi_.end(), 0u);
  std::iota(acc.phi_.begin(), acc.phi_.end(), Elem(0));
  acc.tw_.clear();
  for (long k = std::labs(e); k > 0; --k) acc = acc * base;
  return acc;
}

} // namespace tidyscale::finprod
