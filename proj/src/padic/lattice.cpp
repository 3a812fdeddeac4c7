#include <sstream>

#include "tidyscale/padic.hpp"

namespace tidyscale::padic {

using namespace exactmath;

namespace {

struct Echelon {
  RatMatrix H, U; // gens * U = H
  std::size_t rank = 0;
};

void col_axpy(RatMatrix& m, std::size_t dst, std::size_t src, const Rational& c) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (m(i, src) != 0) m(i, dst) -= c * m(i, src);
}

void col_scale(RatMatrix& m, std::size_t j, const Rational& c) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) *= c;
}

// Representative of x modulo p^e Z_(p): p^e * (p-adic fractional part of x/p^e).
Rational reduce_mod(const Rational& x, long e, const Integer& p) {
  Rational y = x * rpow(p, -e);
  Integer den = y.get_den();
  Integer rest = den;
  unsigned long s = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), p.get_mpz_t());
  if (s == 0) return 0;
  Integer ps = ipow(p, s), inv, k;
  mpz_invert(inv.get_mpz_t(), rest.get_mpz_t(), ps.get_mpz_t());
  k = y.get_num() * inv;
  mpz_fdiv_r(k.get_mpz_t(), k.get_mpz_t(), ps.get_mpz_t());
  Rational frac(k, ps);
  frac.canonicalize();
  return frac * rpow(p, e);
}

// Column echelon over the discrete valuation ring Z_(p) using only
// unimodular column operations.
Echelon local_echelon(const RatMatrix& m, const Integer& p) {
  Echelon out{m, RatMatrix::identity(m.cols()), 0};
  RatMatrix& H = out.H;
  RatMatrix& U = out.U;
  std::size_t k = 0;
  for (std::size_t i = 0; i < H.rows() && k < H.cols(); ++i) {
    std::size_t best = H.cols();
    long bv = 0;
    for (std::size_t j = k; j < H.cols(); ++j) {
      if (H(i, j) == 0) continue;
      long v = valuation(H(i, j), p);
      if (best == H.cols() || v < bv) {
        best = j;
        bv = v;
      }
    }
    if (best == H.cols()) continue;
    H.swap_columns(k, best);
    U.swap_columns(k, best);
    for (std::size_t j = k + 1; j < H.cols(); ++j) {
      if (H(i, j) == 0) continue;
      Rational c = H(i, j) / H(i, k);
      col_axpy(H, j, k, c);
      col_axpy(U, j, k, c);
    }
    Rational unit = rpow(p, bv) / H(i, k);
    col_scale(H, k, unit);
    col_scale(U, k, unit);
    for (std::size_t j = 0; j < k; ++j) {
      Rational r = reduce_mod(H(i, j), bv, p);
      Rational c = (H(i, j) - r) * rpow(p, -bv);
      if (c == 0) continue;
      col_axpy(H, j, k, c);
      col_axpy(U, j, k, c);
    }
    ++k;
  }
  out.rank = k;
  return out;
}

// Z_(p)-basis of {x : m x = 0}.
RatMatrix local_kernel(const RatMatrix& m, const Integer& p) {
  auto e = local_echelon(m, p);
  return e.U.columns(e.rank, m.cols());
}

void require_compatible(const Lattice& a, const Lattice& b) {
  if (a.prime() != b.prime() || a.dim() != b.dim())
    throw InputError("lattices differ in prime or ambient dimension");
}

} // namespace

Lattice::Lattice(const RatMatrix& gens, Integer p) : p_(std::move(p)) {
  require_prime(p_);
  auto e = local_echelon(gens, p_);
  basis_ = e.H.columns(0, e.rank);
}

Lattice Lattice::standard(std::size_t n, const Integer& p) {
  return Lattice(RatMatrix::identity(n), p);
}

Lattice Lattice::zero(std::size_t n, const Integer& p) { return Lattice(RatMatrix(n, 0), p); }

bool Lattice::contains(const Lattice& o) const { return sum(*this, o) == *this; }

bool Lattice::contains_vector(const std::vector<Rational>& v) const {
  RatMatrix c(v.size(), 1);
  c.set_column(0, v);
  return contains(Lattice(c, p_));
}

std::string Lattice::to_string() const {
  std::ostringstream os;
  os << "<";
  for (std::size_t j = 0; j < rank(); ++j) {
    os << (j ? ", " : "") << "(";
    for (std::size_t i = 0; i < dim(); ++i) os << (i ? "," : "") << basis_(i, j).get_str();
    os << ")";
  }
  os << ">";
  return os.str();
}

Lattice image(const RatMatrix& a, const Lattice& l) {
  if (a.cols() != l.dim()) throw InputError("image: dimension mismatch");
  return Lattice(a * l.basis(), l.prime());
}

Lattice sum(const Lattice& a, const Lattice& b) {
  require_compatible(a, b);
  return Lattice(hconcat(a.basis(), b.basis()), a.prime());
}

Lattice intersect(const Lattice& a, const Lattice& b) {
  require_compatible(a, b);
  RatMatrix nb = b.basis();
  for (std::size_t i = 0; i < nb.rows(); ++i)
    for (std::size_t j = 0; j < nb.cols(); ++j) nb(i, j) = -nb(i, j);
  RatMatrix k = local_kernel(hconcat(a.basis(), nb), a.prime());
  RatMatrix x(a.rank(), k.cols());
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) x(i, j) = k(i, j);
  return Lattice(a.basis() * x, a.prime());
}

Lattice meet_subspace(const Lattice& l, const RatMatrix& w) {
  if (w.rows() != l.dim()) throw InputError("meet_subspace: dimension mismatch");
  if (w.cols() == 0) return Lattice::zero(l.dim(), l.prime());
  RatMatrix q = kernel(w.transpose()).transpose(); // rows annihilate w
  if (q.rows() == 0) return l;
  RatMatrix k = local_kernel(q * l.basis(), l.prime());
  return Lattice(l.basis() * k, l.prime());
}

Rational measure_ratio(const Lattice& a, const Lattice& b) {
  require_compatible(a, b);
  if (a.rank() != b.rank()) throw CommensurabilityError("lattices of different rank");
  RatMatrix x;
  try {
    x = solve(b.basis(), a.basis());
  } catch (const InputError&) {
    throw CommensurabilityError("lattices span different subspaces");
  }
  Rational d = determinant(x);
  return rpow(a.prime(), -valuation(d, a.prime()));
}

Integer index(const Lattice& sub, const Lattice& super) {
  if (!super.contains(sub)) throw CommensurabilityError("index: first lattice not contained in second");
  Rational r = measure_ratio(super, sub);
  if (r.get_den() != 1) throw InternalError("index of a contained lattice is fractional");
  return r.get_num();
}

std::pair<Integer, Integer> index_pair(const Lattice& a, const Lattice& b) {
  Lattice m = intersect(a, b);
  if (m.rank() != a.rank() || m.rank() != b.rank())
    throw CommensurabilityError("lattices are not commensurable");
  return {index(m, a), index(m, b)};
}

Integer displacement(const Automorphism& a, const Lattice& v) {
  Lattice w = image(a, v);
  return index(intersect(w, v), w);
}

} // namespace tidyscale::padic
