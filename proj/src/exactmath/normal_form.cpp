#include "tidyscale/exactmath.hpp"

namespace tidyscale::exactmath {

namespace {

Integer abs_of(const Integer& z) { return z < 0 ? Integer(-z) : z; }

Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

void row_axpy(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(dst, j) -= q * m(src, j);
}
void col_axpy(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& q) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, dst) -= q * m(i, src);
}

} // namespace

SmithForm smith_form(const IntMatrix& m) {
  IntMatrix A = m;
  const std::size_t r = m.rows(), c = m.cols();
  IntMatrix U = IntMatrix::identity(r), V = IntMatrix::identity(c);
  std::size_t t = 0;
  while (t < r && t < c) {
    // smallest nonzero entry of the trailing block becomes the pivot
    bool found = false;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = t; i < r; ++i)
      for (std::size_t j = t; j < c; ++j)
        if (A(i, j) != 0 && (!found || abs_of(A(i, j)) < abs_of(A(bi, bj)))) {
          found = true;
          bi = i;
          bj = j;
        }
    if (!found) break;
    A.swap_rows(t, bi);
    U.swap_rows(t, bi);
    A.swap_columns(t, bj);
    V.swap_columns(t, bj);
    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < r; ++i) {
        if (A(i, t) == 0) continue;
        Integer q = floor_div(A(i, t), A(t, t));
        row_axpy(A, i, t, q);
        row_axpy(U, i, t, q);
        if (A(i, t) != 0) {
          A.swap_rows(t, i);
          U.swap_rows(t, i);
          clean = false;
        }
      }
      for (std::size_t j = t + 1; j < c; ++j) {
        if (A(t, j) == 0) continue;
        Integer q = floor_div(A(t, j), A(t, t));
        col_axpy(A, j, t, q);
        col_axpy(V, j, t, q);
        if (A(t, j) != 0) {
          A.swap_columns(t, j);
          V.swap_columns(t, j);
          clean = false;
        }
      }
      if (!clean) continue;
      // divisibility of the remaining block by the pivot
      bool fixed = false;
      for (std::size_t i = t + 1; i < r && !fixed; ++i)
        for (std::size_t j = t + 1; j < c && !fixed; ++j)
          if (A(i, j) % A(t, t) != 0) {
            row_axpy(A, t, i, Integer(-1));
            row_axpy(U, t, i, Integer(-1));
            fixed = true;
          }
      if (!fixed) break;
    }
    if (A(t, t) < 0) {
      for (std::size_t j = 0; j < c; ++j) A(t, j) = -A(t, j);
      for (std::size_t j = 0; j < r; ++j) U(t, j) = -U(t, j);
    }
    ++t;
  }
  return {A, U, V, t};
}

SmithInvariants smith_invariants(const IntMatrix& m) {
  auto sf = smith_form(m);
  SmithInvariants out;
  out.rank = sf.rank;
  for (std::size_t i = 0; i < sf.rank; ++i) out.factors.push_back(sf.D(i, i));
  return out;
}

HermiteResult hermite_with_transform(const IntMatrix& m) {
  IntMatrix A = m;
  const std::size_t r = m.rows(), c = m.cols();
  IntMatrix T = IntMatrix::identity(c);
  std::size_t k = 0;
  for (std::size_t i = 0; i < r && k < c; ++i) {
    for (std::size_t j = k + 1; j < c; ++j) {
      if (A(i, j) == 0) continue;
      if (A(i, k) == 0) {
        A.swap_columns(k, j);
        T.swap_columns(k, j);
        continue;
      }
      Integer a = A(i, k), b = A(i, j), g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      Integer ag = a / g, bg = b / g;
      // [colk colj] <- [colk colj] * [[s, -bg], [t, ag]], determinant 1
      for (IntMatrix* M : {&A, &T}) {
        for (std::size_t row = 0; row < M->rows(); ++row) {
          Integer x = (*M)(row, k), y = (*M)(row, j);
          (*M)(row, k) = s * x + t * y;
          (*M)(row, j) = ag * y - bg * x;
        }
      }
    }
    if (A(i, k) == 0) continue;
    if (A(i, k) < 0) {
      for (std::size_t row = 0; row < r; ++row) A(row, k) = -A(row, k);
      for (std::size_t row = 0; row < c; ++row) T(row, k) = -T(row, k);
    }
    for (std::size_t j = 0; j < k; ++j) {
      Integer q = floor_div(A(i, j), A(i, k));
      if (q == 0) continue;
      col_axpy(A, j, k, q);
      col_axpy(T, j, k, q);
    }
    ++k;
  }
  return {A, T, k};
}

IntMatrix hermite_form(const IntMatrix& m) { return hermite_with_transform(m).H; }

} // namespace tidyscale::exactmath
