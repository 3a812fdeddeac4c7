#include <algorithm>
#include <map>

#include "tidyscale/padic.hpp"

namespace tidyscale::padic {

using namespace exactmath;

Automorphism::Automorphism(RatMatrix m, Integer p) : m_(std::move(m)), p_(std::move(p)) {
  require_prime(p_);
  if (m_.rows() == 0 || m_.rows() != m_.cols()) throw InputError("automorphism matrix must be square and nonempty");
  if (determinant(m_) == 0) throw SingularityError("automorphism matrix is singular");
}

Automorphism Automorphism::inverse() const { return Automorphism(exactmath::inverse(m_), p_); }

Automorphism Automorphism::pow(long e) const { return Automorphism(power(m_, e), p_); }

Automorphism Automorphism::operator*(const Automorphism& o) const {
  if (p_ != o.p_ || dim() != o.dim()) throw InputError("composing automorphisms of different spaces");
  return Automorphism(m_ * o.m_, p_);
}

bool Automorphism::commutes_with(const Automorphism& o) const { return m_ * o.m_ == o.m_ * m_; }

Integer scale(const Automorphism& a) {
  auto np = newton_polygon(charpoly(a.matrix()), a.prime());
  // root valuation -s <= 0 contributes p^{s * length}
  long e = 0;
  for (auto& s : np.segments)
    if (s.slope >= 0) {
      Rational t = s.slope * s.length;
      if (t.get_den() != 1) throw InternalError("non-integral segment height");
      e += t.get_num().get_si();
    }
  return ipow(a.prime(), static_cast<unsigned long>(e));
}

RatMatrix SlopeDecomposition::span(const std::function<bool(const Rational&)>& pred) const {
  RatMatrix out(dim, 0);
  for (auto& part : parts)
    if (pred(part.slope)) out = hconcat(out, part.basis);
  return out;
}

SlopeDecomposition slope_decomposition(const Automorphism& a) {
  const RatMatrix& m = a.matrix();
  std::map<Rational, Poly> grouped; // root valuation -> product of f^mult
  for (auto& [f, mult] : factor_rational(charpoly(m))) {
    auto np = newton_polygon(f, a.prime());
    if (np.segments.size() != 1)
      throw SlopeSeparabilityError("characteristic factor " + poly_to_string(f) +
                                   " has a Newton polygon with several slopes");
    Rational k = -np.segments[0].slope;
    auto it = grouped.find(k);
    Poly fm = poly_pow(f, mult);
    if (it == grouped.end()) grouped[k] = fm;
    else it->second = poly_mul(it->second, fm);
  }
  SlopeDecomposition dec;
  dec.dim = a.dim();
  std::size_t total = 0;
  for (auto& [k, g] : grouped) {
    RatMatrix basis = kernel(poly_eval(g, m));
    total += basis.cols();
    dec.parts.push_back({k, basis});
  }
  if (total != a.dim()) throw InternalError("slope parts do not fill the space");
  return dec;
}

bool is_tidy(const Automorphism& a, const Lattice& v) {
  return v.rank() == a.dim() && displacement(a, v) == scale(a);
}

Lattice step1_tidy(const Automorphism& a) {
  const Integer target = scale(a);
  auto np = newton_polygon(charpoly(a.matrix()), a.prime());
  Rational spread = np.segments.back().slope - np.segments.front().slope;
  Integer c;
  mpz_cdiv_q(c.get_mpz_t(), spread.get_num_mpz_t(), spread.get_den_mpz_t());
  long bound = std::max<long>(64, static_cast<long>(a.dim()) * (4 + 4 * c.get_si()));
  const Lattice std_lat = Lattice::standard(a.dim(), a.prime());
  Lattice v = std_lat;
  for (long m = 0; m <= bound; ++m) {
    if (displacement(a, v) == target) return v;
    v = intersect(std_lat, image(a, v));
  }
  throw InternalError("step 1 did not reach the scale within the iteration bound");
}

Parts parts(const Automorphism& a, const Lattice& v) {
  if (!is_tidy(a, v)) throw PreconditionError("lattice is not tidy for the automorphism");
  auto dec = slope_decomposition(a);
  Parts out;
  out.plus = meet_subspace(v, dec.span([](const Rational& k) { return k <= 0; }));
  out.minus = meet_subspace(v, dec.span([](const Rational& k) { return k >= 0; }));
  out.zero = intersect(out.plus, out.minus);
  if (sum(out.plus, out.minus) != v) throw InternalError("tidy lattice fails V = V+ + V-");
  return out;
}

namespace {

void require_commuting(const std::vector<Automorphism>& family) {
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i + 1; j < family.size(); ++j)
      if (!family[i].commutes_with(family[j]))
        throw UnsupportedError("only commuting families are supported by the p-adic backend");
}

} // namespace

Lattice eigenfactor(const Lattice& u, const std::vector<Automorphism>& family) {
  require_commuting(family);
  RatMatrix w = RatMatrix::identity(u.dim());
  for (auto& a : family) {
    if (a.dim() != u.dim() || a.prime() != u.prime()) throw InputError("eigenfactor: mismatched automorphism");
    auto dec = slope_decomposition(a);
    w = subspace_intersection(w, dec.span([](const Rational& k) { return k <= 0; }));
  }
  return meet_subspace(u, w);
}

Integer relative_scale(const std::vector<Automorphism>& family, const Automorphism& beta,
                       const Lattice& u) {
  auto ext = family;
  ext.push_back(beta);
  Lattice v = eigenfactor(u, ext);
  Lattice bv = image(beta, v);
  if (!bv.contains(v)) throw PreconditionError("U is not tidy for the family and beta");
  return index(v, bv);
}

std::vector<JointPart> joint_decomposition(const std::vector<Automorphism>& gens) {
  if (gens.empty()) throw InputError("empty generator list");
  require_commuting(gens);
  const std::size_t n = gens.front().dim();
  std::vector<JointPart> cur{{{}, RatMatrix::identity(n)}};
  for (auto& g : gens) {
    if (g.dim() != n || g.prime() != gens.front().prime()) throw InputError("generators act on different spaces");
    auto dec = slope_decomposition(g);
    std::vector<JointPart> next;
    for (auto& part : cur)
      for (auto& s : dec.parts) {
        RatMatrix x = subspace_intersection(part.basis, s.basis);
        if (x.cols() == 0) continue;
        auto slopes = part.slopes;
        slopes.push_back(s.slope);
        next.push_back({slopes, x});
      }
    cur = std::move(next);
  }
  std::size_t total = 0;
  for (auto& part : cur) total += part.basis.cols();
  if (total != n) throw InternalError("joint slope parts do not fill the space");
  std::sort(cur.begin(), cur.end(), [](const JointPart& a, const JointPart& b) { return a.slopes < b.slopes; });
  return cur;
}

Lattice common_tidy(const std::vector<Automorphism>& gens) {
  if (gens.size() == 1) return step1_tidy(gens.front());
  auto joint = joint_decomposition(gens);
  const std::size_t n = gens.front().dim();
  const Integer& p = gens.front().prime();
  std::vector<Automorphism> inverses;
  for (auto& g : gens) inverses.push_back(g.inverse());

  Lattice u = Lattice::zero(n, p);
  for (auto& part : joint) {
    Lattice l = meet_subspace(Lattice::standard(n, p), part.basis);
    // Make l stable under the contracting direction of every generator; the
    // commuting family keeps earlier stabilities intact.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < gens.size(); ++i) {
        const Rational& k = part.slopes[i];
        Lattice next = l;
        if (k >= 0) next = sum(next, image(gens[i], next));
        if (k <= 0) next = sum(next, image(inverses[i], next));
        if (next != l) {
          l = next;
          changed = true;
        }
      }
    }
    u = sum(u, l);
  }
  for (auto& g : gens)
    if (!is_tidy(g, u)) throw InternalError("common tidy construction failed for a generator");
  return u;
}

} // namespace tidyscale::padic
