#pragma once

#include <random>

#include "tidyscale/exactmath.hpp"

namespace testsupport {

using tidyscale::Integer;
using tidyscale::IntMatrix;
using tidyscale::Rational;
using tidyscale::RatMatrix;

inline IntMatrix random_int_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                   long lo, long hi) {
  std::uniform_int_distribution<long> d(lo, hi);
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

inline Rational random_rational(std::mt19937_64& rng, long h) {
  std::uniform_int_distribution<long> num(-h, h), den(1, h);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

// Is every column of a an integer combination of the columns of b?
// b must have full column rank.
inline bool int_span_contains(const IntMatrix& b, const IntMatrix& a) {
  using namespace tidyscale::exactmath;
  RatMatrix B = to_rational(b), A = to_rational(a);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    RatMatrix aug = hconcat(B, A.columns(j, j + 1));
    RatMatrix k = kernel(aug);
    if (k.cols() != 1 || k(b.cols(), 0) == 0) return false;
    for (std::size_t i = 0; i < b.cols(); ++i) {
      Rational x = -k(i, 0) / k(b.cols(), 0);
      if (x.get_den() != 1) return false;
    }
  }
  return true;
}

} // namespace testsupport
