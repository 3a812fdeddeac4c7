#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tidyscale/finprod.hpp"

namespace tidyscale::finprod {

namespace {

std::vector<Elem> members(Mask m) {
  std::vector<Elem> out;
  for (unsigned x = 0; x < 64; ++x)
    if (m >> x & 1) out.push_back(static_cast<Elem>(x));
  return out;
}

unsigned popcount(Mask m) { return static_cast<unsigned>(std::popcount(m)); }

void sort_unique(std::vector<Tuple>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Range of coordinates a subgroup actually constrains differently from its
// tails; nullopt for a tails-only subgroup with equal tails.
std::optional<std::pair<long, long>> span(const Subgroup& w) {
  if (w.lo == w.hi && w.tL == w.tR) return std::nullopt;
  return std::make_pair(w.lo, w.hi);
}

std::pair<long, long> common_window(const Subgroup& a, const Subgroup& b) {
  auto sa = span(a), sb = span(b);
  if (!sa && !sb) return {0, 0};
  if (!sa) return *sb;
  if (!sb) return *sa;
  return {std::min(sa->first, sb->first), std::max(sa->second, sb->second)};
}

Integer aligned_count(const Subgroup& w, long lo, long hi) {
  long wlo = w.lo, whi = w.hi;
  if (!span(w)) wlo = whi = lo;
  Integer c = static_cast<unsigned long>(w.S.size());
  for (long i = lo; i < wlo; ++i) c *= popcount(w.tL);
  for (long i = whi; i < hi; ++i) c *= popcount(w.tR);
  return c;
}

} // namespace

std::vector<Tuple> Context::align(const Subgroup& w, long lo, long hi) const {
  long wlo = w.lo, whi = w.hi;
  if (!span(w)) wlo = whi = lo;
  if (lo > wlo || hi < whi) throw InternalError("align: target window does not cover the subgroup window");
  double count = static_cast<double>(w.S.size()) * std::pow(popcount(w.tL), double(wlo - lo)) *
                 std::pow(popcount(w.tR), double(hi - whi));
  if (count > cap_) throw ResourceError("windowed element set exceeds the enumeration cap", count);
  std::vector<Tuple> cur{Tuple()};
  auto extend_by = [&](Mask m) {
    std::vector<Tuple> next;
    auto vals = members(m);
    next.reserve(cur.size() * vals.size());
    for (auto& t : cur)
      for (Elem v : vals) next.push_back(t + static_cast<char>(v));
    cur = std::move(next);
  };
  for (long c = lo; c < wlo; ++c) extend_by(w.tL);
  {
    std::vector<Tuple> next;
    next.reserve(cur.size() * w.S.size());
    for (auto& t : cur)
      for (auto& s : w.S) next.push_back(t + s);
    cur = std::move(next);
  }
  for (long c = whi; c < hi; ++c) extend_by(w.tR);
  std::sort(cur.begin(), cur.end());
  return cur;
}

Subgroup Context::canonical(Subgroup w) const {
  sort_unique(w.S);
  auto splits_front = [&](Mask m) {
    std::vector<Tuple> rest;
    rest.reserve(w.S.size());
    for (auto& t : w.S) {
      if (!(m >> static_cast<Elem>(t[0]) & 1)) return false;
      rest.push_back(t.substr(1));
    }
    sort_unique(rest);
    if (rest.size() * popcount(m) != w.S.size()) return false;
    w.S = std::move(rest);
    return true;
  };
  auto splits_back = [&](Mask m) {
    std::vector<Tuple> rest;
    rest.reserve(w.S.size());
    for (auto& t : w.S) {
      if (!(m >> static_cast<Elem>(t.back()) & 1)) return false;
      rest.push_back(t.substr(0, t.size() - 1));
    }
    sort_unique(rest);
    if (rest.size() * popcount(m) != w.S.size()) return false;
    w.S = std::move(rest);
    return true;
  };
  while (w.lo < w.hi && splits_front(w.tL)) ++w.lo;
  while (w.lo < w.hi && splits_back(w.tR)) --w.hi;
  if (w.lo == w.hi && w.tL == w.tR) w.lo = w.hi = 0;
  return w;
}

Subgroup Context::extend(const Subgroup& w, long lo, long hi) const {
  Subgroup out = w;
  out.S = align(w, lo, hi);
  out.lo = lo;
  out.hi = hi;
  return out;
}

Subgroup Context::make(long lo, long hi, std::vector<Tuple> S, Mask tL, Mask tR) const {
  if (hi < lo) throw InputError("window with hi < lo");
  const auto& F = amb_.F;
  if (!F.is_subgroup(tL) || !F.is_subgroup(tR)) throw InputError("tail sets must be subgroups");
  if ((tL & ~amb_.TL) || (tR & ~amb_.TR)) throw InputError("tail subgroups exceed the ambient tail constraints");
  for (auto& t : S) {
    if (t.size() != static_cast<std::size_t>(hi - lo)) throw InputError("window tuple has the wrong length");
    for (char c : t)
      if (static_cast<Elem>(c) >= F.order()) throw InputError("window tuple entry out of range");
  }
  Subgroup w{lo, hi, std::move(S), tL, tR};
  sort_unique(w.S);
  if (!is_group(w)) throw InputError("window set is not a subgroup");
  return canonical(w);
}

Subgroup Context::product_form(const std::map<long, Mask>& coords, Mask tL, Mask tR) const {
  if (coords.empty()) return tails_only(0, tL, tR);
  long lo = coords.begin()->first, hi = coords.rbegin()->first + 1;
  if (static_cast<long>(coords.size()) != hi - lo) throw InputError("product-form coordinates must be contiguous");
  std::vector<Tuple> cur{Tuple()};
  double count = 1;
  for (auto& [c, m] : coords) {
    if (!amb_.F.is_subgroup(m)) throw InputError("coordinate set at " + std::to_string(c) + " is not a subgroup");
    count *= popcount(m);
    if (count > cap_) throw ResourceError("product-form subgroup exceeds the enumeration cap", count);
    std::vector<Tuple> next;
    for (auto& t : cur)
      for (Elem v : members(m)) next.push_back(t + static_cast<char>(v));
    cur = std::move(next);
  }
  return make(lo, hi, cur, tL, tR);
}

Subgroup Context::tails_only(long boundary, Mask tL, Mask tR) const {
  return make(boundary, boundary, {Tuple()}, tL, tR);
}

Subgroup Context::generated(long lo, long hi, const std::vector<Tuple>& gens, Mask tL, Mask tR) const {
  const auto& F = amb_.F;
  const std::size_t n = static_cast<std::size_t>(hi - lo);
  std::set<Tuple> s{Tuple(n, static_cast<char>(F.identity()))};
  std::vector<Tuple> queue(s.begin(), s.end());
  for (auto& g : gens)
    if (g.size() != n) throw InputError("generator tuple has the wrong length");
  while (!queue.empty()) {
    Tuple t = queue.back();
    queue.pop_back();
    for (auto& g : gens) {
      Tuple u(n, 0);
      for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<char>(F.mul(static_cast<Elem>(t[i]), static_cast<Elem>(g[i])));
      if (s.insert(u).second) {
        if (s.size() > cap_) throw ResourceError("generated subgroup exceeds the enumeration cap", double(s.size()));
        queue.push_back(u);
      }
    }
  }
  return make(lo, hi, {s.begin(), s.end()}, tL, tR);
}

bool Context::compact_open(const Subgroup& w) const {
  return w.tL == amb_.TL && w.tR == amb_.TR && amb_.F.is_subgroup(w.tL) && amb_.F.is_subgroup(w.tR) &&
         is_group(w);
}

bool Context::is_group(const Subgroup& w) const {
  const auto& F = amb_.F;
  if (!F.is_subgroup(w.tL) || !F.is_subgroup(w.tR)) return false;
  const std::size_t n = w.width();
  if (!std::binary_search(w.S.begin(), w.S.end(), Tuple(n, static_cast<char>(F.identity())))) return false;
  double pairs = double(w.S.size()) * double(w.S.size());
  if (pairs > 50 * cap_) throw ResourceError("group check exceeds the enumeration cap", pairs);
  Tuple u(n, 0);
  for (auto& a : w.S)
    for (auto& b : w.S) {
      for (std::size_t i = 0; i < n; ++i)
        u[i] = static_cast<char>(F.mul(static_cast<Elem>(a[i]), F.inv(static_cast<Elem>(b[i]))));
      if (!std::binary_search(w.S.begin(), w.S.end(), u)) return false;
    }
  return true;
}

Subgroup Context::apply(const Automorphism& a, const Subgroup& w) const {
  const long r = static_cast<long>(amb_.fiber);
  long L, H;
  auto sw = span(w);
  auto tw = a.twist_range();
  if (!sw && !tw) {
    Subgroup out = w;
    out.tL = FiniteGroup::apply(a.phi(), w.tL);
    out.tR = FiniteGroup::apply(a.phi(), w.tR);
    return canonical(out);
  }
  if (sw && tw) {
    L = std::min(sw->first, tw->first);
    H = std::max(sw->second, tw->second + 1);
  } else if (sw) {
    L = sw->first;
    H = sw->second;
  } else {
    L = tw->first;
    H = tw->second + 1;
  }
  L = amb_.block(L) * r;
  if (H > L) H = (amb_.block(H - 1) + 1) * r;
  else H = L;
  auto src = align(w, L, H);
  const long nlo = L - a.d() * r, nhi = H - a.d() * r;
  const std::size_t n = static_cast<std::size_t>(nhi - nlo);
  std::vector<std::size_t> from(n);
  std::vector<Perm> maps(n);
  for (std::size_t i = 0; i < n; ++i) {
    long s = a.source(nlo + static_cast<long>(i));
    if (s < L || s >= H) throw InternalError("apply: source coordinate outside the aligned window");
    from[i] = static_cast<std::size_t>(s - L);
    maps[i] = a.A(s);
  }
  Subgroup out;
  out.lo = nlo;
  out.hi = nhi;
  out.tL = FiniteGroup::apply(a.phi(), w.tL);
  out.tR = FiniteGroup::apply(a.phi(), w.tR);
  out.S.reserve(src.size());
  for (auto& x : src) {
    Tuple y(n, 0);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<char>(maps[i][static_cast<Elem>(x[from[i]])]);
    out.S.push_back(std::move(y));
  }
  return canonical(out);
}

Element Context::apply(const Automorphism& a, const Element& x) const {
  const Elem e = amb_.F.identity();
  std::vector<std::pair<long, Elem>> vals;
  vals.reserve(x.v.size());
  long lo = 0, hi = 0;
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    Elem v = static_cast<Elem>(x.v[i]);
    if (v == e) continue;
    long s = x.lo + static_cast<long>(i);
    long t = a.target(s);
    if (vals.empty()) lo = hi = t;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    vals.emplace_back(t, a.act(s, v));
  }
  Element out;
  if (vals.empty()) return out;
  out.lo = lo;
  out.v.assign(static_cast<std::size_t>(hi - lo + 1), static_cast<char>(e));
  for (auto& [c, v] : vals) out.v[static_cast<std::size_t>(c - lo)] = static_cast<char>(v);
  return out;
}

Subgroup Context::intersect(const Subgroup& a, const Subgroup& b) const {
  // enumerate the smaller side only, filtering by membership in the other
  auto [lo, hi] = common_window(a, b);
  bool a_small = aligned_count(a, lo, hi) <= aligned_count(b, lo, hi);
  const Subgroup& small = a_small ? a : b;
  const Subgroup& other = a_small ? b : a;
  Subgroup out{lo, hi, {}, a.tL & b.tL, a.tR & b.tR};
  for (auto& t : align(small, lo, hi))
    if (contains(other, Element{lo, t})) out.S.push_back(t);
  return canonical(out);
}

bool Context::contains(const Subgroup& big, const Subgroup& small) const {
  if ((small.tL & ~big.tL) || (small.tR & ~big.tR)) return false;
  auto [lo, hi] = common_window(big, small);
  if (aligned_count(small, lo, hi) > aligned_count(big, lo, hi)) return false;
  for (auto& t : align(small, lo, hi))
    if (!contains(big, Element{lo, t})) return false;
  return true;
}

bool Context::contains(const Subgroup& w, const Element& x) const {
  const Elem e = amb_.F.identity();
  Tuple win(w.width(), static_cast<char>(e));
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    long c = x.lo + static_cast<long>(i);
    Elem v = static_cast<Elem>(x.v[i]);
    if (c >= w.lo && c < w.hi) win[static_cast<std::size_t>(c - w.lo)] = static_cast<char>(v);
    else if (v != e) {
      Mask t = c < w.lo ? w.tL : w.tR;
      if (!(t >> v & 1)) return false;
    }
  }
  return std::binary_search(w.S.begin(), w.S.end(), win);
}

namespace {


} // namespace

Integer Context::index(const Subgroup& v, const Subgroup& w) const {
  Subgroup m = intersect(v, w);
  if (m.tL != v.tL || m.tR != v.tR) throw CommensurabilityError("index is infinite: tail subgroups differ");
  auto [lo, hi] = common_window(v, m);
  Integer a = aligned_count(v, lo, hi), b = aligned_count(m, lo, hi);
  if (a % b != 0) throw InternalError("subgroup index is not an integer");
  return a / b;
}

Rational Context::measure_ratio(const Subgroup& a, const Subgroup& b) const {
  Rational r(index(a, b), index(b, a));
  r.canonicalize();
  return r;
}

Integer Context::displacement(const Automorphism& a, const Subgroup& v) const { return index(apply(a, v), v); }

std::optional<std::vector<Mask>> Context::projections_if_product(const Subgroup& w) const {
  std::vector<Mask> m(w.width(), 0);
  for (auto& t : w.S)
    for (std::size_t i = 0; i < t.size(); ++i) m[i] |= Mask(1) << static_cast<Elem>(t[i]);
  double prod = 1;
  for (Mask x : m) prod *= popcount(x);
  if (prod != static_cast<double>(w.S.size())) return std::nullopt;
  return m;
}

Subgroup Context::product_set(const Subgroup& a, const Subgroup& b) const {
  const auto& F = amb_.F;
  auto [lo, hi] = common_window(a, b);
  auto sa = align(a, lo, hi), sb = align(b, lo, hi);
  double pairs = double(sa.size()) * double(sb.size());
  if (pairs > 50 * cap_) throw ResourceError("set product exceeds the enumeration cap", pairs);
  const std::size_t n = static_cast<std::size_t>(hi - lo);
  std::unordered_set<Tuple> out;
  Tuple u(n, 0);
  for (auto& x : sa)
    for (auto& y : sb) {
      for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<char>(F.mul(static_cast<Elem>(x[i]), static_cast<Elem>(y[i])));
      out.insert(u);
    }
  auto mask_product = [&](Mask p, Mask q) {
    Mask m = 0;
    for (Elem x : members(p))
      for (Elem y : members(q)) m |= Mask(1) << F.mul(x, y);
    return m;
  };
  Subgroup s{lo, hi, {out.begin(), out.end()}, mask_product(a.tL, b.tL), mask_product(a.tR, b.tR)};
  return canonical(s);
}

std::string Context::to_string(const Subgroup& w) const {
  const auto& F = amb_.F;
  std::ostringstream os;
  os << "tails " << F.mask_to_string(w.tL) << " | " << F.mask_to_string(w.tR);
  if (w.lo == w.hi) {
    if (w.tL != w.tR) os << " split at " << w.lo;
    return os.str();
  }
  os << ", window [" << w.lo << "," << w.hi << ")";
  if (auto p = projections_if_product(w)) {
    os << " product";
    for (std::size_t i = 0; i < p->size(); ++i) os << " " << w.lo + static_cast<long>(i) << ":" << F.mask_to_string((*p)[i]);
  } else {
    os << " " << w.S.size() << " tuples";
    if (w.S.size() <= 12) {
      for (auto& t : w.S) {
        os << " (";
        for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << F.name(static_cast<Elem>(t[i]));
        os << ")";
      }
    }
  }
  return os.str();
}

} // namespace tidyscale::finprod
