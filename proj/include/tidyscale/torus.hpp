#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tidyscale/exactmath.hpp"

// SL(n, Q_p) under conjugation by diagonal matrices. Compact open subgroups
// are valuation patterns {a : v_p(a_ij) >= m_ij}; the diagonal (units) part
// is carried implicitly.
namespace tidyscale::torus {

// Bound of an entry forced to vanish.
inline constexpr long kAbsent = std::numeric_limits<long>::max() / 4;

class Pattern {
public:
  // bounds[i][j]; diagonal entries must be 0, kAbsent marks a zero entry.
  explicit Pattern(std::vector<std::vector<long>> bounds);
  static Pattern iwahori(std::size_t n);

  std::size_t n() const { return m_.size(); }
  long at(std::size_t i, std::size_t j) const { return m_[i][j]; }
  const std::vector<std::vector<long>>& bounds() const { return m_; }
  bool operator==(const Pattern& o) const { return m_ == o.m_; }
  // this subset of o
  bool subset_of(const Pattern& o) const;
  std::string to_string() const;

private:
  std::vector<std::vector<long>> m_;
};

// Conjugation by diag(p^{w_1}, ..., p^{w_n}); sum of w must be 0.
struct Diagonal {
  std::vector<long> w;
  explicit Diagonal(std::vector<long> w);
  Diagonal operator+(const Diagonal& o) const;
  Diagonal operator*(long k) const;
  bool operator==(const Diagonal& o) const { return w == o.w; }
};

Pattern conjugate(const Pattern& pat, const Diagonal& d);
Pattern intersect(const Pattern& a, const Pattern& b);
// [q : p] = p^{sum over i != j of (p_ij - q_ij)} for p subset of q.
Integer pattern_index(const Pattern& p, const Pattern& q, const Integer& prime);
// [d(P) : d(P) n P]
Integer scale(const Diagonal& d, const Pattern& pat, const Integer& prime);

struct Root {
  std::size_t i, j;
  bool operator==(const Root&) const = default;
  std::string label() const; // 1-based "(i,j)"
};
std::vector<Root> roots(std::size_t n);

// Entry (i,j) is multiplied by p^{w_i - w_j}, so its measure changes by
// p^{w_j - w_i}: the relative modular function of the root subgroup.
Rational root_modulus(const Root& r, const Diagonal& d, const Integer& prime);
Integer root_relative_scale(const Root& r, const Diagonal& d, const Integer& prime);

struct RootEigenfactor {
  Root root;
  // rho(w) = w_j - w_i, as coefficients on w
  std::vector<long> functional;
  std::string pattern; // the root subgroup as a pattern description
};
std::vector<RootEigenfactor> root_eigenfactors(std::size_t n);

// A factor in an ordered product inside the congruence quotient.
struct Factor {
  std::string label;
  bool diagonal = false; // true: the unit diagonal part U_0 of U
  // For unipotent factors: the entries allowed (with U's bounds).
  std::vector<Root> roots;
};

struct ProductCheck {
  bool pass = false;
  std::size_t image_size = 0;   // |image of U mod p^k|
  std::size_t product_size = 0; // |ordered product|
  std::string witness;          // an element of one set missing from the other
  std::vector<std::string> order;
};

// Is the ordered product of the factor images equal to the image of U in
// SL(n, Z/p^k)? Cap bounds the size of the enumerated quotient.
ProductCheck ordered_product_check(const Pattern& u, const std::vector<Factor>& factors,
                                   const Integer& prime, unsigned level, double cap);

struct HalvingCheck {
  bool pass = false;          // with U_0 at the front
  ProductCheck front;
  std::vector<std::size_t> u0_positions_passing;
  std::vector<std::string> order; // sign patterns of the unipotent factors
};

// Factoring of U over all sign patterns of the sequence in the halving
// (lexicographic, - before +) order, U_0 interleaved at each position.
HalvingCheck halving_factorization_check(const Pattern& u, const std::vector<Diagonal>& seq,
                                         const Integer& prime, unsigned level, double cap);

} // namespace tidyscale::torus
