#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tidyscale/exactmath.hpp"

// Q_p^n with automorphisms in GL(n, Q). Compact open subgroups are
// Z_(p)-lattices; only the p-part of any index is meaningful here.
namespace tidyscale::padic {

class Automorphism {
public:
  Automorphism(RatMatrix m, Integer p);
  const RatMatrix& matrix() const { return m_; }
  const Integer& prime() const { return p_; }
  std::size_t dim() const { return m_.rows(); }
  Automorphism inverse() const;
  Automorphism pow(long e) const;
  Automorphism operator*(const Automorphism& o) const;
  bool operator==(const Automorphism& o) const { return p_ == o.p_ && m_ == o.m_; }
  bool commutes_with(const Automorphism& o) const;

private:
  RatMatrix m_;
  Integer p_;
};

// Z_(p)-module of rank r inside Q^n, always stored canonically:
// lower-triangular column echelon, pivot of column k equal to p^{e_k},
// entries of pivot rows left of the pivot reduced to k/p^s in [0, p^{e_k}).
// Non-pivot rows of partial-rank lattices may carry prime-to-p
// denominators (they are forced by the subspace).
class Lattice {
public:
  Lattice() = default;
  // Columns of `gens` generate the module; they need not be independent.
  Lattice(const RatMatrix& gens, Integer p);
  static Lattice standard(std::size_t n, const Integer& p);
  static Lattice zero(std::size_t n, const Integer& p);

  std::size_t dim() const { return basis_.rows(); }
  std::size_t rank() const { return basis_.cols(); }
  const RatMatrix& basis() const { return basis_; }
  const Integer& prime() const { return p_; }

  bool operator==(const Lattice& o) const { return p_ == o.p_ && basis_ == o.basis_; }
  bool operator!=(const Lattice& o) const { return !(*this == o); }
  bool contains(const Lattice& o) const;
  bool contains_vector(const std::vector<Rational>& v) const;
  std::string to_string() const;

private:
  RatMatrix basis_;
  Integer p_;
};

Lattice image(const RatMatrix& a, const Lattice& l);
inline Lattice image(const Automorphism& a, const Lattice& l) { return image(a.matrix(), l); }
Lattice intersect(const Lattice& a, const Lattice& b);
Lattice sum(const Lattice& a, const Lattice& b);
// L intersected with the column space of w.
Lattice meet_subspace(const Lattice& l, const RatMatrix& w);

// [super : sub] for sub contained in super of the same rank.
Integer index(const Lattice& sub, const Lattice& super);
// ([a : a n b], [b : a n b]) for commensurable lattices of equal rank and span.
std::pair<Integer, Integer> index_pair(const Lattice& a, const Lattice& b);
// m(a)/m(b) for lattices spanning the same subspace.
Rational measure_ratio(const Lattice& a, const Lattice& b);

// [a(V) : a(V) n V]
Integer displacement(const Automorphism& a, const Lattice& v);

Integer scale(const Automorphism& a);

// Invariant subspace on which every characteristic root has valuation `slope`.
struct SlopePart {
  Rational slope;
  RatMatrix basis;
  std::size_t dim() const { return basis.cols(); }
};
// Slopes strictly increasing.
struct SlopeDecomposition {
  std::vector<SlopePart> parts;
  std::size_t dim = 0;
  // Sum of the parts whose slope satisfies pred (dim x d basis).
  RatMatrix span(const std::function<bool(const Rational&)>& pred) const;
};
SlopeDecomposition slope_decomposition(const Automorphism& a);

bool is_tidy(const Automorphism& a, const Lattice& v);
Lattice step1_tidy(const Automorphism& a);

struct Parts {
  Lattice plus, minus, zero;
};
// Requires V tidy for a.
Parts parts(const Automorphism& a, const Lattice& v);

// U n (intersection of the slope-nonpositive subspaces of the family).
Lattice eigenfactor(const Lattice& u, const std::vector<Automorphism>& family);
// [beta(U_{a,beta+}) : U_{a,beta+}]
Integer relative_scale(const std::vector<Automorphism>& family, const Automorphism& beta,
                       const Lattice& u);

// Simultaneous refinement of the slope decompositions of a commuting family.
struct JointPart {
  std::vector<Rational> slopes; // one per generator
  RatMatrix basis;
};
std::vector<JointPart> joint_decomposition(const std::vector<Automorphism>& gens);

Lattice common_tidy(const std::vector<Automorphism>& gens);

} // namespace tidyscale::padic
