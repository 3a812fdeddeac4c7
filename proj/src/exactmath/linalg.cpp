#include "tidyscale/exactmath.hpp"

namespace tidyscale::exactmath {

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& m) {
  std::vector<std::size_t> piv;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t sel = row;
    while (sel < m.rows() && m(sel, col) == 0) ++sel;
    if (sel == m.rows()) continue;
    m.swap_rows(row, sel);
    Rational inv = 1 / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      Rational f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= f * m(row, j);
    }
    piv.push_back(col);
    ++row;
  }
  return piv;
}

} // namespace

Rational determinant(RatMatrix m) {
  if (m.rows() != m.cols()) throw InputError("determinant of non-square matrix");
  Rational det = 1;
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t sel = c;
    while (sel < n && m(sel, c) == 0) ++sel;
    if (sel == n) return 0;
    if (sel != c) {
      m.swap_rows(sel, c);
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      Rational f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

RatMatrix inverse(const RatMatrix& m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw InputError("inverse of non-square matrix");
  RatMatrix aug = hconcat(m, RatMatrix::identity(n));
  auto piv = rref(aug);
  if (piv.size() < n || piv[n - 1] != n - 1) throw SingularityError("matrix is singular");
  return aug.columns(n, 2 * n);
}

std::size_t rank(RatMatrix m) { return rref(m).size(); }

RatMatrix kernel(const RatMatrix& m) {
  RatMatrix a = m;
  auto piv = rref(a);
  std::vector<bool> is_piv(m.cols(), false);
  for (auto c : piv) is_piv[c] = true;
  RatMatrix k(m.cols(), m.cols() - piv.size());
  std::size_t out = 0;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_piv[free]) continue;
    k(free, out) = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) k(piv[r], out) = -a(r, free);
    ++out;
  }
  return k;
}

RatMatrix column_space(const RatMatrix& m) {
  RatMatrix a = m;
  auto piv = rref(a);
  RatMatrix out(m.rows(), piv.size());
  for (std::size_t k = 0; k < piv.size(); ++k) out.set_column(k, m.column(piv[k]));
  return out;
}

RatMatrix subspace_intersection(const RatMatrix& a, const RatMatrix& b) {
  // a x = b y  <=>  [a | -b] (x; y) = 0
  RatMatrix nb(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) nb(i, j) = -b(i, j);
  RatMatrix k = kernel(hconcat(a, nb));
  RatMatrix x(a.cols(), k.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) x(i, j) = k(i, j);
  return column_space(a * x);
}

RatMatrix solve(const RatMatrix& b, const RatMatrix& a) {
  RatMatrix aug = hconcat(b, a);
  auto piv = rref(aug);
  const std::size_t r = b.cols();
  if (piv.size() < r || (r > 0 && piv[r - 1] != r - 1))
    throw InputError("solve: coefficient matrix lacks full column rank");
  if (piv.size() > r) throw InputError("solve: system is inconsistent");
  RatMatrix x(r, a.cols());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) x(i, j) = aug(i, r + j);
  return x;
}

RatMatrix to_rational(const IntMatrix& m) {
  RatMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Rational(m(i, j));
  return r;
}

RatMatrix power(const RatMatrix& m, long e) {
  RatMatrix base = e < 0 ? inverse(m) : m;
  unsigned long k = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  RatMatrix acc = RatMatrix::identity(m.rows());
  while (k) {
    if (k & 1) acc = acc * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return acc;
}

} // namespace tidyscale::exactmath
