#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tidyscale/errors.hpp"
#include "tidyscale/matrix.hpp"

namespace tidyscale {

using Integer = mpz_class;
using Rational = mpq_class; // gmp keeps mpq_class canonical after arithmetic

using IntMatrix = Matrix<Integer>;
using RatMatrix = Matrix<Rational>;

namespace exactmath {

// "-10/3", "7", "0"; denominators must be nonzero.
Rational parse_rational(std::string_view s);
std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

bool is_prime(const Integer& p);
void require_prime(const Integer& p);

// v with q = p^v * (unit prime to p). nullopt encodes +infinity (q = 0).
std::optional<long> padic_valuation(const Rational& q, const Integer& p);
// Integer version, n != 0 required; p is not re-checked for primality.
long valuation(const Integer& n, const Integer& p);
long valuation(const Rational& q, const Integer& p);

Integer ipow(const Integer& p, unsigned long e);
// p^e for any integer e (a reciprocal when e < 0).
Rational rpow(const Integer& p, long e);

struct Segment {
  Rational slope;
  long length;
  bool operator==(const Segment&) const = default;
};

// Lower convex hull of (i, v_p(c_i)). A segment of slope s and length m
// stands for m roots of valuation -s.
struct NewtonPolygon {
  std::vector<Segment> segments;
  long degree() const;
  // (root valuation, multiplicity), valuations strictly decreasing.
  std::vector<std::pair<Rational, long>> root_valuations() const;
  bool operator==(const NewtonPolygon&) const = default;
};

// coeffs[i] is the coefficient of x^i.
NewtonPolygon newton_polygon(const std::vector<Rational>& coeffs,
                             const Integer& p);

struct SmithInvariants {
  std::size_t rank = 0;
  std::vector<Integer> factors; // d_1 | d_2 | ..., all positive
};

SmithInvariants smith_invariants(const IntMatrix& m);

// U * m * V = D with U, V unimodular and D diagonal in Smith form.
struct SmithForm {
  IntMatrix D, U, V;
  std::size_t rank = 0;
};
SmithForm smith_form(const IntMatrix& m);

// Column Hermite form H = m * T: pivots found top to bottom, pivot of column
// k in row r_k with r_0 < r_1 < ..., pivots positive, entries of row r_k in
// columns left of k reduced into [0, pivot). Zero columns trail.
IntMatrix hermite_form(const IntMatrix& m);
struct HermiteResult {
  IntMatrix H, T;
  std::size_t rank = 0;
};
HermiteResult hermite_with_transform(const IntMatrix& m);

// Rational linear algebra.
Rational determinant(RatMatrix m);
RatMatrix inverse(const RatMatrix& m); // SingularityError when singular
std::size_t rank(RatMatrix m);
// Columns form a basis of {x : m x = 0}.
RatMatrix kernel(const RatMatrix& m);
// Columns form a basis of the column space of m (a subset of m's columns).
RatMatrix column_space(const RatMatrix& m);
// Basis of the intersection of two column spaces.
RatMatrix subspace_intersection(const RatMatrix& a, const RatMatrix& b);
// X with b X = a; b must have full column rank. InputError if no solution.
RatMatrix solve(const RatMatrix& b, const RatMatrix& a);
RatMatrix to_rational(const IntMatrix& m);
RatMatrix power(const RatMatrix& m, long e);

// Polynomials with rational coefficients, ascending order, no trailing zeros
// (the zero polynomial is the empty vector).
using Poly = std::vector<Rational>;

Poly poly_trim(Poly f);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b);
Poly poly_gcd(Poly a, Poly b); // monic
Poly poly_derivative(const Poly& f);
Poly poly_monic(const Poly& f);
Poly poly_pow(const Poly& f, unsigned e);
Rational poly_eval(const Poly& f, const Rational& x);
RatMatrix poly_eval(const Poly& f, const RatMatrix& m);
std::string poly_to_string(const Poly& f);

// Monic characteristic polynomial det(xI - m).
Poly charpoly(const RatMatrix& m);

// Factorization over Q into monic irreducible factors with multiplicities.
// Factors are sorted by degree then coefficients.
std::vector<std::pair<Poly, unsigned>> factor_rational(const Poly& f);

} // namespace exactmath
} // namespace tidyscale
