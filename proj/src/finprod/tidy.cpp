#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
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

bool has_span(const Subgroup& w) { return !(w.lo == w.hi && w.tL == w.tR); }

std::pair<long, long> window_of(const std::vector<const Subgroup*>& ws) {
  bool any = false;
  long lo = 0, hi = 0;
  for (auto* w : ws) {
    if (!has_span(*w)) continue;
    lo = any ? std::min(lo, w->lo) : w->lo;
    hi = any ? std::max(hi, w->hi) : w->hi;
    any = true;
  }
  return {lo, hi};
}

unsigned perm_order(const Perm& p) {
  Perm id(p.size());
  std::iota(id.begin(), id.end(), Elem(0));
  Perm q = p;
  unsigned k = 1;
  while (q != id) {
    q = compose(p, q);
    ++k;
  }
  return k;
}

// Coordinates where a product-form object can differ from its tails.
std::pair<long, long> region(const Automorphism& a, const Subgroup* w) {
  bool any = false;
  long lo = 0, hi = 1;
  if (w && has_span(*w)) {
    lo = w->lo;
    hi = w->hi;
    any = true;
  }
  if (auto tw = a.twist_range()) {
    lo = any ? std::min(lo, tw->first) : tw->first;
    hi = any ? std::max(hi, tw->second + 1) : tw->second + 1;
  }
  if (hi <= lo) hi = lo + 1;
  return {lo, hi};
}

long margin(const Context& ctx, const Automorphism& a) {
  long r = static_cast<long>(ctx.ambient().fiber);
  return r * (std::labs(a.d()) + 1) * (static_cast<long>(perm_order(a.phi())) + 1) + r;
}

// Product-form subgroup from per-coordinate subgroups on [lo - m, hi + m);
// each margin must be constant and becomes a tail.
Subgroup from_masks(const Context& ctx, long lo, long hi, long m, const std::function<Mask(long)>& f,
                    const std::string& what) {
  std::vector<Mask> v;
  for (long c = lo - m; c < hi + m; ++c) v.push_back(f(c));
  const Mask tl = v.front(), tr = v.back();
  for (long i = 0; i < m; ++i)
    if (v[static_cast<std::size_t>(i)] != tl || v[v.size() - 1 - static_cast<std::size_t>(i)] != tr)
      throw UnsupportedError(what + ": coordinate subgroups are not eventually constant");
  std::map<long, Mask> coords;
  for (long c = lo; c < hi; ++c) coords[c] = v[static_cast<std::size_t>(c - lo + m)];
  for (auto& [c, mask] : coords)
    if (!ctx.F().is_subgroup(mask)) throw InternalError(what + ": coordinate set is not a subgroup");
  // The result may be closed but not open, so bypass the ambient tail check
  // only through make(), which still verifies the group property.
  return ctx.product_form(coords, tl, tr);
}

struct ProductView {
  std::vector<Mask> proj;
  long lo, hi;
  Mask tL, tR;
  Mask at(long c) const {
    if (c < lo) return tL;
    if (c >= hi) return tR;
    return proj[static_cast<std::size_t>(c - lo)];
  }
};

std::optional<ProductView> view(const Context& ctx, const Subgroup& w) {
  auto p = ctx.projections_if_product(w);
  if (!p) return std::nullopt;
  return ProductView{*p, w.lo, w.hi, w.tL, w.tR};
}

Mask mask_product(const FiniteGroup& F, Mask p, Mask q) {
  Mask m = 0;
  for (Elem x : members(p))
    for (Elem y : members(q)) m |= Mask(1) << F.mul(x, y);
  return m;
}

// Is the set product a*b equal to v?
bool product_equals(const Context& ctx, const Subgroup& a, const Subgroup& b, const Subgroup& v) {
  auto pa = view(ctx, a), pb = view(ctx, b);
  if (pa && pb) {
    auto pv = view(ctx, v);
    if (!pv) return false;
    const auto& F = ctx.F();
    if (mask_product(F, a.tL, b.tL) != v.tL || mask_product(F, a.tR, b.tR) != v.tR) return false;
    auto [lo, hi] = window_of({&a, &b, &v});
    for (long c = lo; c < hi; ++c)
      if (mask_product(F, pa->at(c), pb->at(c)) != pv->at(c)) return false;
    return true;
  }
  return ctx.product_set(a, b) == v;
}

} // namespace

Part forward_part(const Context& ctx, const Automorphism& a, const Subgroup& w, long depth) {
  if (depth < 1) throw InputError("depth must be at least 1");
  Part out{w, false, 0};
  Subgroup img = w;
  for (long m = 1; m <= depth; ++m) {
    img = ctx.apply(a, img);
    Subgroup next = ctx.intersect(out.sub, img);
    out.steps = m;
    if (next == out.sub) {
      out.stabilized = true;
      return out;
    }
    out.sub = std::move(next);
  }
  return out;
}

Subgroup exact_forward_part(const Context& ctx, const Automorphism& a, const Subgroup& w) {
  auto pv = view(ctx, w);
  if (!pv) throw UnsupportedError("exact limits need a product-form subgroup");
  auto [L, H] = region(a, &w);
  const Perm id = ctx.F().identity_perm();
  const unsigned q = perm_order(a.phi());
  const long r = static_cast<long>(ctx.ambient().fiber);
  auto f = [&](long t) -> Mask {
    Mask cur = pv->at(t);
    long s = t;
    Perm M = id;
    if (a.d() == 0) {
      for (long k = 0; k < 100000; ++k) {
        s = a.source(s);
        M = compose(M, a.A(s));
        cur &= FiniteGroup::apply(M, pv->at(s));
        if (s == t && M == id) return cur;
      }
      throw InternalError("exact limit: orbit did not close");
    }
    long extra = -1;
    while (extra < static_cast<long>(q) * r) {
      s = a.source(s);
      M = compose(M, a.A(s));
      cur &= FiniteGroup::apply(M, pv->at(s));
      bool past = a.d() > 0 ? s >= H : s < L;
      if (past) ++extra;
    }
    return cur;
  };
  return from_masks(ctx, L, H, margin(ctx, a), f, "exact limit");
}

Verdict check_T1(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth) {
  if (ctx.apply(a, v) == v) return {true, true, ""};
  const Automorphism inv = a.inverse();
  Subgroup P = v, M = v, Pi = v, Mi = v;
  bool pst = false, mst = false;
  for (long n = 1; n <= depth; ++n) {
    Pi = ctx.apply(a, Pi);
    Mi = ctx.apply(inv, Mi);
    Subgroup P2 = ctx.intersect(P, Pi), M2 = ctx.intersect(M, Mi);
    pst = pst || P2 == P;
    mst = mst || M2 == M;
    P = std::move(P2);
    M = std::move(M2);
    // V_+ = V (or V_- = V) as soon as one step does not shrink it
    if (P == v || M == v) return {true, true, ""};
    if (!product_equals(ctx, P, M, v)) {
      std::ostringstream os;
      os << "V+ V- is a proper subset of V at n = " << n << "; V+ ~ " << ctx.to_string(P) << "; V- ~ "
         << ctx.to_string(M);
      return {false, true, os.str()};
    }
    if (pst && mst) return {true, true, ""};
  }
  return {true, false, ""};
}

Verdict check_T2(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth) {
  if (ctx.apply(a, v) == v) return {true, true, ""};
  const long r = static_cast<long>(ctx.ambient().fiber);
  const double budget = std::min(ctx.cap(), 20000.0);
  long m = depth * std::labs(a.d()) * r + r;
  auto count = [&](long mm) {
    double base = has_span(v) ? double(v.S.size()) : 1.0;
    return base * std::pow(std::popcount(v.tL), double(mm)) * std::pow(std::popcount(v.tR), double(mm));
  };
  while (m > 0 && count(m) > budget) --m;
  long lo = has_span(v) ? v.lo : 0, hi = has_span(v) ? v.hi : 0;
  auto ext = ctx.extend(v, lo - m, hi + m);
  const Automorphism inv = a.inverse();
  std::vector<bool> in(static_cast<std::size_t>(2 * depth + 1));
  for (auto& t : ext.S) {
    Element x{lo - m, t};
    in[static_cast<std::size_t>(depth)] = true;
    Element y = x;
    for (long j = 1; j <= depth; ++j) {
      y = ctx.apply(a, y);
      in[static_cast<std::size_t>(depth + j)] = ctx.contains(v, y);
    }
    y = x;
    for (long j = 1; j <= depth; ++j) {
      y = ctx.apply(inv, y);
      in[static_cast<std::size_t>(depth - j)] = ctx.contains(v, y);
    }
    auto first = std::find(in.begin(), in.end(), true) - in.begin();
    auto last = in.rend() - std::find(in.rbegin(), in.rend(), true) - 1;
    for (auto k = first; k <= last; ++k)
      if (!in[static_cast<std::size_t>(k)]) {
        std::ostringstream os;
        os << "orbit of a window element returns to V: in at j = " << first - depth << " and " << last - depth
           << ", out at j = " << k - depth;
        return {false, true, os.str()};
      }
  }
  return {true, false, ""};
}

bool is_tidy(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth) {
  return check_T1(ctx, a, v, depth).holds && check_T2(ctx, a, v, depth).holds;
}

Subgroup obstruction_K(const Context& ctx, const Automorphism& a) {
  const auto& amb = ctx.ambient();
  if (a.d() == 0) return ctx.tails_only(0, ctx.F().trivial(), ctx.F().trivial());
  auto [L, H] = region(a, nullptr);
  const bool has_tw = a.twist_range().has_value();
  // follow a value at coordinate c under repeated application until it is
  // past every twist; phi preserves T_L and T_R from there on
  auto end_value = [&](const Automorphism& g, long c, Elem x) {
    long s = c;
    auto past = [&](long z) { return !has_tw || (g.d() > 0 ? z < L : z >= H); };
    while (!past(s)) {
      x = g.A(s)[x];
      s = g.target(s);
    }
    return x;
  };
  const Automorphism inv = a.inverse();
  const Mask fwd_end = a.d() > 0 ? amb.TL : amb.TR;
  const Mask bwd_end = a.d() > 0 ? amb.TR : amb.TL;
  auto f = [&](long c) -> Mask {
    Mask m = 0;
    for (unsigned x = 0; x < ctx.F().order(); ++x) {
      Elem e = static_cast<Elem>(x);
      if ((fwd_end >> end_value(a, c, e) & 1) && (bwd_end >> end_value(inv, c, e) & 1)) m |= Mask(1) << x;
    }
    return m;
  };
  return from_masks(ctx, L, H, margin(ctx, a), f, "obstruction K");
}

Subgroup obstruction_L(const Context& ctx, const Automorphism& a, const Subgroup& v) {
  auto pv = view(ctx, v);
  if (!pv) throw UnsupportedError("the comparison obstruction needs a product-form subgroup");
  auto [L, H] = region(a, &v);
  const unsigned q = perm_order(a.phi());
  const long r = static_cast<long>(ctx.ambient().fiber);
  // alpha^j applied to x placed at c stays in V for all large j
  auto eventually_in = [&](const Automorphism& g, long c, Elem x) {
    long s = c;
    if (g.d() == 0) {
      // periodic orbit: every j counts, so check one full period
      const Elem x0 = x;
      for (long k = 0; k < 100000; ++k) {
        if (!(pv->at(s) >> x & 1)) return false;
        x = g.A(s)[x];
        s = g.target(s);
        if (s == c && x == x0) return true;
      }
      throw InternalError("comparison obstruction: orbit did not close");
    }
    long extra = -1;
    while (extra < static_cast<long>(q) * r) {
      bool past = g.d() > 0 ? s < L : s >= H;
      if (past) {
        ++extra;
        if (!(pv->at(s) >> x & 1)) return false;
      }
      x = g.A(s)[x];
      s = g.target(s);
    }
    return true;
  };
  const Automorphism inv = a.inverse();
  auto f = [&](long c) -> Mask {
    Mask m = 0;
    for (unsigned x = 0; x < ctx.F().order(); ++x)
      if (eventually_in(a, c, static_cast<Elem>(x)) && eventually_in(inv, c, static_cast<Elem>(x)))
        m |= Mask(1) << x;
    return m;
  };
  return from_masks(ctx, L, H, margin(ctx, a), f, "obstruction L");
}

std::pair<Subgroup, Subgroup> join(const Context& ctx, const Subgroup& v, const Subgroup& x, JoinReading reading) {
  const auto& F = ctx.F();
  auto [lo, hi] = window_of({&v, &x});
  auto sv = ctx.extend(v, lo, hi).S;
  auto sx = ctx.extend(x, lo, hi).S;
  const std::size_t n = static_cast<std::size_t>(hi - lo);
  auto form = [&](Elem l, Elem u) {
    return reading == JoinReading::Conjugation ? F.mul(F.mul(l, u), F.inv(l)) : F.mul(u, F.inv(l));
  };
  auto tail = [&](Mask tv, Mask tx) {
    Mask prod = mask_product(F, tv, tx), out = 0;
    for (Elem u : members(tv)) {
      bool ok = true;
      for (Elem l : members(tx)) ok = ok && (prod >> form(l, u) & 1);
      if (ok) out |= Mask(1) << u;
    }
    return out;
  };
  double pairs = double(sv.size()) * double(sx.size());
  if (pairs > 50 * ctx.cap()) throw ResourceError("join step exceeds the enumeration cap", pairs);
  std::unordered_set<Tuple> vx;
  Tuple u(n, 0);
  for (auto& a : sv)
    for (auto& b : sx) {
      for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<char>(F.mul(static_cast<Elem>(a[i]), static_cast<Elem>(b[i])));
      vx.insert(u);
    }
  Subgroup v2{lo, hi, {}, tail(v.tL, x.tL), tail(v.tR, x.tR)};
  for (auto& a : sv) {
    bool ok = true;
    for (auto it = sx.begin(); ok && it != sx.end(); ++it) {
      for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<char>(form(static_cast<Elem>((*it)[i]), static_cast<Elem>(a[i])));
      ok = vx.count(u) > 0;
    }
    if (ok) v2.S.push_back(a);
  }
  v2 = ctx.canonical(v2);
  return {v2, ctx.product_set(v2, x)};
}

TidyingTrace tidying_procedure(const Context& ctx, const Automorphism& a, const Subgroup& u, long depth,
                               JoinReading reading) {
  TidyingTrace tr;
  tr.U = u;
  Subgroup cur = u, img = u;
  for (long n = 0; n <= depth; ++n) {
    if (n > 0) {
      img = ctx.apply(a, img);
      cur = ctx.intersect(cur, img);
    }
    tr.step1_indices.push_back(ctx.displacement(a, cur));
    if (!tr.step1_ok && check_T1(ctx, a, cur, depth).holds) {
      tr.V = cur;
      tr.step1_n = n;
      tr.step1_ok = true;
    }
  }
  if (!tr.step1_ok) tr.V = cur;
  tr.K = obstruction_K(ctx, a);
  auto [v2, w] = join(ctx, tr.V, tr.K, reading);
  tr.V2 = v2;
  tr.W = w;
  tr.W_is_group = ctx.is_group(w);
  if (tr.W_is_group) {
    tr.W_T1 = check_T1(ctx, a, w, depth);
    tr.W_T2 = check_T2(ctx, a, w, depth);
    tr.W_index = ctx.displacement(a, w);
    tr.index_minimal =
        std::all_of(tr.step1_indices.begin(), tr.step1_indices.end(), [&](const Integer& i) { return tr.W_index <= i; });
  }
  return tr;
}

SearchReport common_tidy_iterative(const Context& ctx, const std::vector<Automorphism>& gens, const Subgroup& u,
                                   long depth) {
  if (gens.empty()) throw InputError("empty generator list");
  SearchReport rep;
  auto tidy_all = [&](const Subgroup& w) {
    return std::all_of(gens.begin(), gens.end(), [&](const Automorphism& g) { return is_tidy(ctx, g, w, depth); });
  };
  std::vector<Subgroup> seen{u}, frontier{u};
  rep.candidates = 1;
  if (tidy_all(u)) {
    rep.found = true;
    rep.result = u;
    return rep;
  }
  for (long level = 1; level <= depth; ++level) {
    rep.depth_used = level;
    std::vector<Subgroup> next;
    for (auto& x : frontier)
      for (auto& g : gens) {
        auto tr = tidying_procedure(ctx, g, x, depth);
        if (!tr.W_is_group || !ctx.compact_open(tr.W)) continue;
        if (std::find(seen.begin(), seen.end(), tr.W) != seen.end()) continue;
        seen.push_back(tr.W);
        next.push_back(tr.W);
      }
    rep.candidates = seen.size();
    std::vector<Subgroup> hits;
    for (auto& w : next)
      if (tidy_all(w)) hits.push_back(w);
    if (!hits.empty()) {
      // deterministic tie-break on the canonical description
      std::sort(hits.begin(), hits.end(),
                [&](const Subgroup& a, const Subgroup& b) { return ctx.to_string(a) < ctx.to_string(b); });
      rep.found = true;
      rep.result = hits.front();
      return rep;
    }
    if (next.empty()) {
      rep.exhausted = true;
      rep.note = "tidying sequences closed up after " + std::to_string(seen.size()) +
                 " candidates with none tidy for every generator";
      return rep;
    }
    frontier = std::move(next);
  }
  rep.note = "depth exhausted before a common tidy subgroup appeared";
  return rep;
}

} // namespace tidyscale::finprod
