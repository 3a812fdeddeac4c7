#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tidyscale/errors.hpp"
#include "tidyscale/exactmath.hpp"

// Restricted products of a finite group F over Z x {0..r-1}. A coordinate
// (n, a) is addressed linearly as c = n*r + a. Subgroups are two tail
// subgroups plus an explicit element set on a window of coordinates.
namespace tidyscale::finprod {

using Elem = std::uint8_t;
using Mask = std::uint64_t;     // subset of F, bit x for element x
using Perm = std::vector<Elem>; // automorphism of F as an element map

class FiniteGroup {
public:
  FiniteGroup(std::vector<std::string> names, std::vector<std::vector<Elem>> table);
  static FiniteGroup cyclic(unsigned n);
  // e, s1, s2, s3, t, t2: s_j the transposition fixing j, t = (1 2 3)
  static FiniteGroup s3();
  // <c1, c2, a : c_i^2 = a^2 = e, c1 c2 = c2 c1, a c1 = c2 a>
  static FiniteGroup e8();

  unsigned order() const { return static_cast<unsigned>(names_.size()); }
  Elem identity() const { return id_; }
  Elem mul(Elem a, Elem b) const { return table_[a][b]; }
  Elem inv(Elem a) const { return inv_[a]; }
  const std::string& name(Elem a) const { return names_[a]; }
  Elem by_name(const std::string& s) const;

  Mask full() const;
  Mask trivial() const { return Mask(1) << id_; }
  Mask generated(const std::vector<Elem>& gens) const;
  bool is_subgroup(Mask m) const;
  std::string mask_to_string(Mask m) const;

  Perm identity_perm() const;
  Perm conjugation(Elem g) const; // x -> g x g^-1
  bool is_automorphism(const Perm& p) const;
  static Mask apply(const Perm& p, Mask m);

private:
  std::vector<std::string> names_;
  std::vector<std::vector<Elem>> table_;
  std::vector<Elem> inv_;
  Elem id_ = 0;
};

Perm compose(const Perm& a, const Perm& b); // a after b
Perm invert(const Perm& a);

struct Ambient {
  FiniteGroup F;
  unsigned fiber = 1; // r
  Mask TL, TR;        // tail constraint subgroups
  Ambient(FiniteGroup f, unsigned fiber, Mask tl, Mask tr);
  long block(long c) const;         // n
  long offset(long c) const;        // a
  long coord(long n, long a) const; // n*r + a
};

// alpha(f)(t) = A_s(f(s)) with source s = sigma(t), sigma(n,a) = (n+d, pi(a)),
// and A_s = phi o tau_s where tau_s is the local twist at source s.
class Automorphism {
public:
  Automorphism() = default;
  Automorphism(const Ambient& amb, long d, std::vector<unsigned> pi, Perm phi,
               std::map<long, Perm> twists);
  static Automorphism identity(const Ambient& amb);
  static Automorphism shift(const Ambient& amb, long d);

  long d() const { return d_; }
  long source(long t) const;
  long target(long s) const;
  Perm A(long s) const;
  Elem act(long s, Elem x) const; // A_s(x)
  const Perm& phi() const { return phi_; }
  const std::map<long, Perm>& twists() const { return tw_; }
  const std::vector<unsigned>& pi() const { return pi_; }
  unsigned fiber() const { return static_cast<unsigned>(pi_.size()); }
  // Twisted coordinates, as a closed range [first, last], or nullopt.
  std::optional<std::pair<long, long>> twist_range() const;

  Automorphism operator*(const Automorphism& o) const;
  Automorphism inverse() const;
  Automorphism pow(long e) const;
  bool operator==(const Automorphism& o) const {
    return d_ == o.d_ && pi_ == o.pi_ && phi_ == o.phi_ && tw_ == o.tw_;
  }

private:
  void normalize();
  long d_ = 0;
  std::vector<unsigned> pi_;
  Perm phi_;
  std::map<long, Perm> tw_;
};

using Tuple = std::string; // one Elem per window coordinate

// tL^(c < lo) x S x tR^(c >= hi), kept canonical (minimal window; an empty
// window with equal tails sits at 0).
struct Subgroup {
  long lo = 0, hi = 0;
  std::vector<Tuple> S; // sorted, contains the identity tuple
  Mask tL = 0, tR = 0;
  bool operator==(const Subgroup& o) const = default;
  std::size_t width() const { return static_cast<std::size_t>(hi - lo); }
};

// Finitely supported element: values on [lo, lo + v.size()), identity elsewhere.
struct Element {
  long lo = 0;
  Tuple v;
};

class Context {
public:
  explicit Context(Ambient amb, double cap = 1e6) : amb_(std::move(amb)), cap_(cap) {}
  const Ambient& ambient() const { return amb_; }
  const FiniteGroup& F() const { return amb_.F; }
  double cap() const { return cap_; }

  // Builders. `coords` maps window coordinate -> allowed subgroup.
  Subgroup make(long lo, long hi, std::vector<Tuple> S, Mask tL, Mask tR) const;
  Subgroup product_form(const std::map<long, Mask>& coords, Mask tL, Mask tR) const;
  Subgroup tails_only(long boundary, Mask tL, Mask tR) const;
  // Subgroup generated by the tails and explicit window tuples.
  Subgroup generated(long lo, long hi, const std::vector<Tuple>& gens, Mask tL, Mask tR) const;

  Subgroup canonical(Subgroup w) const;
  Subgroup extend(const Subgroup& w, long lo, long hi) const;
  bool compact_open(const Subgroup& w) const;
  bool is_group(const Subgroup& w) const;

  Subgroup apply(const Automorphism& a, const Subgroup& w) const;
  Element apply(const Automorphism& a, const Element& x) const;
  Subgroup intersect(const Subgroup& a, const Subgroup& b) const;
  bool contains(const Subgroup& big, const Subgroup& small) const;
  bool contains(const Subgroup& w, const Element& x) const;

  // [v : v n w]; CommensurabilityError when infinite.
  Integer index(const Subgroup& v, const Subgroup& w) const;
  // m(a)/m(b) = [a : a n b] / [b : a n b]
  Rational measure_ratio(const Subgroup& a, const Subgroup& b) const;
  // [alpha(V) : alpha(V) n V]
  Integer displacement(const Automorphism& a, const Subgroup& v) const;

  // Per-coordinate subgroups if the window set is a direct product.
  std::optional<std::vector<Mask>> projections_if_product(const Subgroup& w) const;

  // Set product a*b as a windowed set (may fail to be a group).
  Subgroup product_set(const Subgroup& a, const Subgroup& b) const;

  std::string to_string(const Subgroup& w) const;

private:
  std::vector<Tuple> align(const Subgroup& w, long lo, long hi) const;
  Ambient amb_;
  double cap_;
};

struct Part {
  Subgroup sub;
  bool stabilized = false;
  long steps = 0;
};
// Intersection of alpha^k(W), 0 <= k <= m, for m up to depth.
Part forward_part(const Context& ctx, const Automorphism& a, const Subgroup& w, long depth);
// Exact intersection over all k >= 0, for product-form W.
Subgroup exact_forward_part(const Context& ctx, const Automorphism& a, const Subgroup& w);

struct Verdict {
  bool holds = false;
  bool exact = false;        // false: holds at the searched depth only
  std::string witness;
};
Verdict check_T1(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth);
Verdict check_T2(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth);
bool is_tidy(const Context& ctx, const Automorphism& a, const Subgroup& v, long depth);

// Reading of the join step: lvl^-1 (conjugation, default) or vl^-1 (literal).
enum class JoinReading { Conjugation, Literal };

struct TidyingTrace {
  Subgroup U;
  Subgroup V;                     // after Step 1
  long step1_n = 0;
  bool step1_ok = false;          // T1 reached within depth
  std::vector<Integer> step1_indices; // displacement of each Step-1 iterate
  Subgroup K;
  Subgroup V2;                    // V''
  Subgroup W;
  bool W_is_group = false;
  Verdict W_T1, W_T2;
  Integer W_index = 0;
  bool index_minimal = false;     // W's displacement <= every Step-1 iterate's
};
TidyingTrace tidying_procedure(const Context& ctx, const Automorphism& a, const Subgroup& u, long depth,
                               JoinReading reading = JoinReading::Conjugation);

// Step 2a obstruction: exact, coordinatewise.
Subgroup obstruction_K(const Context& ctx, const Automorphism& a);
// Step 2 obstruction for product-form V (two-sided j).
Subgroup obstruction_L(const Context& ctx, const Automorphism& a, const Subgroup& v);
// {v in V : l v l^-1 (or v l^-1) in V X for all l in X}, and its join with X.
std::pair<Subgroup, Subgroup> join(const Context& ctx, const Subgroup& v, const Subgroup& x, JoinReading reading);

struct SearchReport {
  bool found = false;
  Subgroup result;
  long depth_used = 0;
  std::size_t candidates = 0;
  bool exhausted = false; // no new candidates appeared before depth ran out
  std::string note;
};
SearchReport common_tidy_iterative(const Context& ctx, const std::vector<Automorphism>& gens, const Subgroup& u,
                                   long depth);

} // namespace tidyscale::finprod
