#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tidyscale/invariants.hpp"

namespace tidyscale::invariants {

using exactmath::to_string;

namespace {

std::string word_string(const Word& w) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

Word unit(std::size_t g, std::size_t i, long e = 1) {
  Word w(g, 0);
  w[i] = e;
  return w;
}

Word add(const Word& a, const Word& b) {
  Word c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Word scaled(const Word& a, long k) {
  Word c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * k;
  return c;
}

long dot(const std::vector<long>& a, const Word& b) {
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// t^e exactly for integer t >= 2.
Rational tpow(const Integer& t, long e) {
  Integer m = exactmath::ipow(t, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rational(1, 1) / Rational(m) : Rational(m);
}

// e with q = t^e, or nullopt.
std::optional<long> exact_log(Rational q, const Integer& t) {
  if (q <= 0) return std::nullopt;
  long sign = 1;
  if (q < 1) {
    q = 1 / q;
    sign = -1;
  }
  long e = 0;
  while (q > 1) {
    Rational r = q / Rational(t);
    if (r < 1) return std::nullopt;
    q = r;
    ++e;
  }
  return q == 1 ? std::optional<long>(sign * e) : std::nullopt;
}

// Generator > 1 of the cyclic subgroup of Q^+ spanned by `values`
// (multiplicative Euclid). nullopt when the values are not in a cyclic group.
std::optional<Rational> cyclic_generator(const std::vector<Rational>& values) {
  Rational g = 1;
  for (Rational v : values) {
    if (v <= 0) return std::nullopt;
    if (v < 1) v = 1 / v;
    Rational a = g, b = v;
    if (a < b) std::swap(a, b);
    for (int it = 0; b != 1; ++it) {
      if (it > 4096) return std::nullopt;
      while (a >= b) a /= b;
      std::swap(a, b);
      if (a < b) std::swap(a, b);
    }
    g = a;
  }
  return g;
}

std::string delta_description(const Integer& t, const std::vector<long>& rho) {
  std::string s = to_string(t) + "^(";
  bool first = true;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] == 0) continue;
    if (!first) s += rho[i] > 0 ? "+" : "-";
    else if (rho[i] < 0) s += "-";
    long a = rho[i] < 0 ? -rho[i] : rho[i];
    if (a != 1) s += std::to_string(a);
    s += "x" + std::to_string(i + 1);
    first = false;
  }
  return s + (first ? "0)" : ")");
}

long as_long(const Integer& z) {
  if (!z.fits_slong_p()) throw ResourceError("integer exceeds machine range", z.get_d());
  return z.get_si();
}

} // namespace

std::vector<Word> words_up_to(std::size_t g, long len) {
  std::vector<Word> out;
  Word cur(g, 0);
  std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
    if (i == g) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (long v = -left; v <= left; ++v) {
      cur[i] = v;
      rec(i + 1, left - (v < 0 ? -v : v));
    }
    cur[i] = 0;
  };
  for (long n = 0; n <= len; ++n) rec(0, n);
  return out;
}

std::vector<EigenfactorRecord> relative_scale_table(const Backend& b, long word_len) {
  const std::size_t g = b.generator_count();
  auto labels = b.atoms();
  auto words = words_up_to(g, word_len);
  std::vector<EigenfactorRecord> recs;
  std::vector<std::vector<Rational>> keys;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    std::vector<Rational> key;
    for (std::size_t i = 0; i < g; ++i) key.push_back(b.modulus(a, unit(g, i)));
    if (std::all_of(key.begin(), key.end(), [](const Rational& q) { return q == 1; })) continue;
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it != keys.end()) {
      auto& r = recs[std::size_t(it - keys.begin())];
      r.atoms.push_back(a);
      r.label += "=" + labels[a];
      continue;
    }
    EigenfactorRecord r;
    r.atoms = {a};
    r.label = labels[a];
    // The image of Delta_V is cyclic; its generator is t_V.
    auto gen = cyclic_generator(key);
    if (!gen || gen->get_den() != 1)
      throw InternalError("relative modular function of " + labels[a] + " does not have cyclic integer image");
    r.t = gen->get_num();
    for (auto& q : key) r.rho.push_back(*exact_log(q, r.t));
    r.delta = delta_description(r.t, r.rho);
    // t_V must be realized as an index [w(V) : V] by a word within the bound.
    Integer best = 0;
    for (auto& w : words) {
      Integer s = b.relative_scale(a, w);
      if (s > 1 && (best == 0 || s < best)) best = s;
    }
    r.complete = best == r.t;
    recs.push_back(r);
    keys.push_back(key);
  }
  return recs;
}

IntMatrix rho_matrix(const std::vector<EigenfactorRecord>& recs, std::size_t g) {
  IntMatrix R(recs.size(), g);
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < g; ++j) R(i, j) = recs[i].rho.at(j);
  return R;
}

RankCorank rank_corank(const std::vector<EigenfactorRecord>& recs, std::size_t g) {
  RankCorank rc;
  rc.factor_number = recs.size();
  if (recs.empty()) return rc;
  auto inv = exactmath::smith_invariants(rho_matrix(recs, g));
  rc.rank = inv.rank;
  rc.corank_free = recs.size() - inv.rank;
  for (auto& d : inv.factors)
    if (d > 1) rc.corank_torsion.push_back(d);
  return rc;
}

std::vector<bool> extreme_points(const std::vector<std::vector<long>>& pts) {
  const std::size_t n = pts.size();
  std::vector<bool> out(n, true);
  if (n == 0) return out;
  const std::size_t d = pts.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    // Caratheodory: a point in the hull lies in the hull of at most d+1
    // affinely independent others.
    bool inside = false;
    const std::size_t kmax = std::min(d + 1, others.size());
    for (std::size_t k = 1; k <= kmax && !inside; ++k) {
      std::vector<std::size_t> pick(k);
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (inside) return;
        if (depth == k) {
          RatMatrix A(d + 1, k), rhs(d + 1, 1);
          for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t r = 0; r < d; ++r) A(r, c) = pts[pick[c]][r];
            A(d, c) = 1;
          }
          for (std::size_t r = 0; r < d; ++r) rhs(r, 0) = pts[i][r];
          rhs(d, 0) = 1;
          if (exactmath::rank(A) != k) return;
          try {
            RatMatrix lam = exactmath::solve(A, rhs);
            bool nonneg = true;
            for (std::size_t c = 0; c < k; ++c) nonneg = nonneg && lam(c, 0) >= 0;
            inside = nonneg;
          } catch (const InputError&) {
          }
          return;
        }
        for (std::size_t s = start; s < others.size(); ++s) {
          pick[depth] = others[s];
          rec(s + 1, depth + 1);
        }
      };
      rec(0, 0);
    }
    out[i] = !inside;
  }
  return out;
}

namespace {

Integer doubled_hull_area(std::vector<std::vector<long>> pts) {
  if (pts.size() < 3) return 0;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto cross = [](const std::vector<long>& o, const std::vector<long>& a, const std::vector<long>& b) -> Integer {
    return Integer(a[0] - o[0]) * (b[1] - o[1]) - Integer(a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::vector<long>> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  Integer area = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    auto& a = hull[i];
    auto& c = hull[(i + 1) % hull.size()];
    area += Integer(a[0]) * c[1] - Integer(c[0]) * a[1];
  }
  return abs(area);
}

} // namespace

MSet m_set(const std::vector<EigenfactorRecord>& recs, std::size_t g) {
  MSet m;
  auto rc = rank_corank(recs, g);
  const std::size_t r = rc.rank;
  if (recs.empty()) {
    m.basis = IntMatrix(g, 0);
    m.doubled_area = Integer(0);
    return m;
  }
  IntMatrix R = rho_matrix(recs, g);
  if (r == g) {
    m.basis = IntMatrix::identity(g);
  } else {
    // U R V = D: the first r columns of V span a complement of ker R.
    auto sf = exactmath::smith_form(R);
    m.basis = sf.V.columns(0, r);
    for (std::size_t j = 0; j < r; ++j) {
      std::size_t i = 0;
      while (i < g && m.basis(i, j) == 0) ++i;
      if (i < g && m.basis(i, j) < 0)
        for (std::size_t k = 0; k < g; ++k) m.basis(k, j) = -m.basis(k, j);
    }
  }
  IntMatrix P = R * m.basis;
  for (std::size_t i = 0; i < P.rows(); ++i) {
    std::vector<long> pt;
    for (std::size_t j = 0; j < P.cols(); ++j) pt.push_back(as_long(P(i, j)));
    m.points.push_back(pt);
  }
  if (r > 4) {
    m.notice = "hull statistics omitted for rank " + std::to_string(r) + " > 4";
    return m;
  }
  m.extreme = extreme_points(m.points);
  m.extreme_count = std::size_t(std::count(m.extreme.begin(), m.extreme.end(), true));
  if (r <= 1) m.doubled_area = Integer(0);
  else if (r == 2) m.doubled_area = doubled_hull_area(m.points);
  return m;
}

std::vector<std::vector<long>> separation_sequence(const std::vector<std::vector<long>>& pts) {
  std::vector<std::vector<long>> out;
  const std::size_t n = pts.size();
  if (n < 2) return out;
  const std::size_t d = pts.front().size();
  if (std::set<std::vector<long>>(pts.begin(), pts.end()).size() != n)
    throw InputError("separation needs distinct points");
  std::vector<std::string> cls(n); // joint sign pattern so far
  auto singletons = [&] { return std::set<std::string>(cls.begin(), cls.end()).size() == n; };
  // Coefficient order 0, 1, -1, 2, -2, ...
  auto coeff = [](long k) { return k % 2 ? (k + 1) / 2 : -(k / 2); };
  // small coefficients first, while the box stays cheap
  auto box_ok = [&](long B) {
    double size = 1;
    for (std::size_t i = 0; i < d; ++i) size *= double(2 * B + 1);
    return B <= 64 && size <= 2e5;
  };
  for (long B = 1; box_ok(B) && !singletons(); ++B) {
    std::vector<long> idx(d, 0);
    const long m = 2 * B + 1;
    while (true) {
      std::vector<long> x(d);
      long top = 0;
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = coeff(idx[i]);
        top = std::max(top, x[i] < 0 ? -x[i] : x[i]);
      }
      if (top == B) {
        bool valid = true;
        std::vector<std::string> next = cls;
        for (std::size_t p = 0; p < n && valid; ++p) {
          long v = dot(pts[p], x);
          valid = v != 0;
          next[p] += v > 0 ? '+' : '-';
        }
        if (valid && std::set<std::string>(next.begin(), next.end()).size() >
                         std::set<std::string>(cls.begin(), cls.end()).size()) {
          cls = next;
          out.push_back(x);
          if (singletons()) break;
        }
      }
      std::size_t i = d;
      while (i > 0 && ++idx[i - 1] == m) idx[--i] = 0;
      if (i == 0) break;
    }
  }
  // Nearly parallel points: split a class {a, b, ...} directly. With
  // x0 = |b|^2 a - (a.b) b we get a.x0 > 0 = b.x0 (a, b not positively
  // proportional), so x = N x0 - b puts a and b on opposite sides; a moment
  // curve term (1, c, c^2, ...) then moves x off every zero.
  while (!singletons()) {
    std::size_t ia = n, ib = n;
    for (std::size_t i = 0; i < n && ia == n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (cls[i] == cls[j]) {
          ia = i;
          ib = j;
          break;
        }
    auto idot = [&](const std::vector<Integer>& x, const std::vector<long>& q) {
      Integer v = 0;
      for (std::size_t i = 0; i < d; ++i) v += x[i] * q[i];
      return v;
    };
    const auto &a = pts[ia], &b = pts[ib];
    std::vector<Integer> bz(b.begin(), b.end());
    Integer bb = idot(bz, b), ab = idot(bz, a);
    std::vector<Integer> x0(d);
    for (std::size_t i = 0; i < d; ++i) x0[i] = bb * a[i] - ab * b[i];
    if (idot(x0, a) <= 0) throw InputError("separation needs points that are not positively proportional");
    Integer N = 1 + (abs(ab) / idot(x0, a));
    std::vector<Integer> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = N * x0[i] - b[i];
    long c = 2;
    for (auto& q : pts)
      for (long v : q) c = std::max(c, std::abs(v) + 2);
    std::vector<Integer> e(d);
    Integer ck = 1, emax = 0;
    for (std::size_t i = 0; i < d; ++i, ck *= c) e[i] = ck;
    for (auto& q : pts) emax = std::max(emax, Integer(abs(idot(e, q))));
    // scale x + e keeps every nonzero sign of x once scale > |e.q|
    Integer scale = emax + 1;
    std::vector<long> y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = as_long(scale * x[i] + e[i]);
    for (std::size_t q = 0; q < n; ++q) cls[q] += dot(pts[q], y) > 0 ? '+' : '-';
    out.push_back(y);
  }
  return out;
}

InvariantsReport compute_invariants(const Backend& b, long word_len) {
  InvariantsReport rep;
  rep.records = relative_scale_table(b, word_len);
  rep.rc = rank_corank(rep.records, b.generator_count());
  rep.m = m_set(rep.records, b.generator_count());
  rep.separation = separation_sequence(rep.m.points);
  return rep;
}

std::vector<Check> verify_suite(const Backend& b, long word_len) {
  const std::size_t g = b.generator_count();
  auto recs = relative_scale_table(b, word_len);
  auto words = words_up_to(g, word_len);
  auto short_words = words_up_to(g, std::min<long>(word_len, 3));
  auto pair_words = words_up_to(g, std::min<long>(word_len, 2));
  std::vector<Check> out;
  auto fail = [](Check& c, std::string w) {
    if (c.pass) c.witness = std::move(w);
    c.pass = false;
  };

  Check s1{"S1 s(w) = s(w^-1) = 1 iff w(U) = U", true, ""};
  for (auto& w : words) {
    bool unimodular = b.scale(w) == 1 && b.scale(scaled(w, -1)) == 1;
    if (unimodular != b.fixes_tidy(w)) fail(s1, "w = " + word_string(w));
  }
  out.push_back(s1);

  Check s2{"S2 s(w^n) = s(w)^n", true, ""};
  for (auto& w : pair_words) {
    Integer s = b.scale(w), p = 1;
    for (long k = 1; k <= 4; ++k) {
      p *= s;
      if (b.scale(scaled(w, k)) != p) fail(s2, "w = " + word_string(w) + ", n = " + std::to_string(k));
    }
  }
  out.push_back(s2);

  Check s3{"S3 s(w)/s(w^-1) = product of Delta_V(w)", true, ""};
  for (auto& w : short_words) {
    Rational lhs = Rational(b.scale(w)) / Rational(b.scale(scaled(w, -1))), rhs = 1;
    for (auto& r : recs) rhs *= b.modulus(r.atoms.front(), w);
    if (lhs != rhs) fail(s3, "w = " + word_string(w) + ": " + to_string(lhs) + " vs " + to_string(rhs));
  }
  out.push_back(s3);

  Check delta_rho{"Delta_V(w) = t_V^rho_V(w)", true, ""};
  for (auto& r : recs)
    for (auto& w : short_words)
      if (b.modulus(r.atoms.front(), w) != tpow(r.t, dot(r.rho, w))) fail(delta_rho, r.label + " at " + word_string(w));
  out.push_back(delta_rho);

  Check mod{"Delta_V(w) = s_V(w)/s_V(w^-1)", true, ""};
  for (auto& r : recs)
    for (std::size_t i = 0; i < g; ++i)
      for (long e : {1L, -1L}) {
        Word w = unit(g, i, e);
        Rational q = Rational(b.relative_scale(r.atoms.front(), w)) /
                     Rational(b.relative_scale(r.atoms.front(), scaled(w, -1)));
        if (q != b.modulus(r.atoms.front(), w)) fail(mod, r.label + " at " + word_string(w));
      }
  out.push_back(mod);

  Check add_rho{"rho_V additive", true, ""};
  for (auto& r : recs)
    for (auto& x : pair_words)
      for (auto& y : pair_words) {
        auto a = r.atoms.front();
        if (b.modulus(a, add(x, y)) != b.modulus(a, x) * b.modulus(a, y))
          fail(add_rho, r.label + " at " + word_string(x) + " + " + word_string(y));
      }
  out.push_back(add_rho);

  Check t612{"Thm 6.12 s(w) = product of s_V(w)", true, ""};
  for (auto& w : words) {
    Integer prod = 1;
    for (auto& r : recs) prod *= b.relative_scale(r.atoms.front(), w);
    Integer s = b.scale(w);
    if (s != prod) fail(t612, "w = " + word_string(w) + ": s = " + to_string(s) + ", product = " + to_string(prod));
  }
  out.push_back(t612);

  Check p64{"Prop 6.4 w(U) = U iff rho_V(w) = 0 for all V", true, ""};
  for (auto& w : words) {
    bool kernel = std::all_of(recs.begin(), recs.end(), [&](const EigenfactorRecord& r) { return dot(r.rho, w) == 0; });
    if (kernel != b.fixes_tidy(w)) fail(p64, "w = " + word_string(w));
  }
  out.push_back(p64);

  Check t415{"Thm 4.15 commutators and roots of normalizing words", true, ""};
  for (auto& x : pair_words)
    for (auto& y : pair_words) {
      // xyx^-1y^-1 in the abelian family
      Word c = add(add(x, y), add(scaled(x, -1), scaled(y, -1)));
      if (b.scale(c) != 1 || b.scale(scaled(c, -1)) != 1) fail(t415, "commutator of " + word_string(x));
    }
  for (auto& w : words_up_to(g, std::max<long>(1, word_len / 2)))
    for (long k = 2; k <= 3; ++k) {
      bool power_unimodular = b.scale(scaled(w, k)) == 1 && b.scale(scaled(w, -k)) == 1;
      bool unimodular = b.scale(w) == 1 && b.scale(scaled(w, -1)) == 1;
      if (power_unimodular && !unimodular) fail(t415, word_string(w) + "^" + std::to_string(k));
    }
  out.push_back(t415);

  auto rc = rank_corank(recs, g);
  auto m = m_set(recs, g);
  Check cnt{"f.n. = |M_H| and rank bounds", true, ""};
  std::set<std::vector<long>> distinct(m.points.begin(), m.points.end());
  if (distinct.size() != rc.factor_number) fail(cnt, "|M_H| = " + std::to_string(distinct.size()));
  if (rc.rank > rc.factor_number) fail(cnt, "rank exceeds factor number");
  if (rc.rank == 0 && rc.factor_number != 0) fail(cnt, "rank 0 with nonzero factor number");
  if (rc.rank == 1 && rc.factor_number > 2) fail(cnt, "rank 1 with factor number > 2");
  out.push_back(cnt);

  for (auto& c : b.backend_checks(word_len)) out.push_back(c);
  return out;
}

std::vector<std::size_t> weyl_action(const Backend& b, const std::vector<EigenfactorRecord>& recs,
                                     const RatMatrix& element) {
  auto conj = b.conjugate_generators(element);
  if (!conj) throw NormalizationError("element does not normalize the generator family");
  const std::size_t g = b.generator_count();
  std::vector<std::size_t> perm;
  std::vector<bool> hit(recs.size(), false);
  for (auto& r : recs) {
    // (beta.phi)(g_i) = phi(beta^-1 g_i beta)
    std::vector<long> rho(g);
    for (std::size_t i = 0; i < g; ++i) rho[i] = dot(r.rho, (*conj)[i]);
    std::size_t j = 0;
    while (j < recs.size() && !(recs[j].t == r.t && recs[j].rho == rho)) ++j;
    if (j == recs.size()) throw InternalError("conjugate of " + r.label + " is not a relative modular function");
    if (hit[j]) throw InternalError("conjugation does not act bijectively");
    hit[j] = true;
    perm.push_back(j);
  }
  return perm;
}

} // namespace tidyscale::invariants
