#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tidyscale/exactmath.hpp"
#include "tidyscale/finprod.hpp"
#include "tidyscale/padic.hpp"
#include "tidyscale/torus.hpp"

// Invariants of a finitely generated abelian group of automorphisms with a
// common tidy subgroup. Elements of the group are exponent vectors over the
// generators.
namespace tidyscale::invariants {

using Word = std::vector<long>;

struct Check {
  std::string name;
  bool pass = true;
  std::string witness;
};

class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual std::size_t generator_count() const = 0;
  // Eigenfactors other than U_0, with display labels.
  virtual std::vector<std::string> atoms() const = 0;
  // Delta_V(w) = m(w(V)) / m(V)
  virtual Rational modulus(std::size_t atom, const Word& w) const = 0;
  // s_V(w) = [w(V) : w(V) n V]
  virtual Integer relative_scale(std::size_t atom, const Word& w) const = 0;
  // s(w), computed without reference to the eigenfactors
  virtual Integer scale(const Word& w) const = 0;
  // w(U) = U for the common tidy subgroup U
  virtual bool fixes_tidy(const Word& w) const = 0;
  // Words for beta^-1 g_i beta, one per generator; nullopt when beta does
  // not normalize the family. `element` is backend-specific.
  virtual std::optional<std::vector<Word>> conjugate_generators(const RatMatrix& element) const;
  // Identities that need backend structure (nested tidy subgroups etc.).
  virtual std::vector<Check> backend_checks(long word_len) const;
};

// ---- backends ----

class PadicBackend : public Backend {
public:
  explicit PadicBackend(std::vector<padic::Automorphism> gens);
  std::string name() const override { return "padic"; }
  std::size_t generator_count() const override { return gens_.size(); }
  std::vector<std::string> atoms() const override { return labels_; }
  Rational modulus(std::size_t atom, const Word& w) const override;
  Integer relative_scale(std::size_t atom, const Word& w) const override;
  Integer scale(const Word& w) const override;
  bool fixes_tidy(const Word& w) const override;
  std::optional<std::vector<Word>> conjugate_generators(const RatMatrix& element) const override;
  std::vector<Check> backend_checks(long word_len) const override;

  const padic::Lattice& tidy() const { return u_; }
  padic::Automorphism word(const Word& w) const;

private:
  std::vector<padic::Automorphism> gens_;
  padic::Lattice u_;
  std::vector<padic::Lattice> parts_;
  std::vector<std::vector<Rational>> slopes_;
  std::vector<std::string> labels_;
};

class TorusBackend : public Backend {
public:
  TorusBackend(std::size_t n, Integer prime, std::vector<torus::Diagonal> gens);
  std::string name() const override { return "torus"; }
  std::size_t generator_count() const override { return gens_.size(); }
  std::vector<std::string> atoms() const override;
  Rational modulus(std::size_t atom, const Word& w) const override;
  Integer relative_scale(std::size_t atom, const Word& w) const override;
  Integer scale(const Word& w) const override;
  bool fixes_tidy(const Word& w) const override;
  // element: a permutation matrix
  std::optional<std::vector<Word>> conjugate_generators(const RatMatrix& element) const override;
  std::vector<Check> backend_checks(long word_len) const override;

  torus::Diagonal word(const Word& w) const;

private:
  std::size_t n_;
  Integer p_;
  std::vector<torus::Diagonal> gens_;
  std::vector<torus::Root> roots_;
  // roots whose functionals are positive multiples of each other form one eigenfactor
  std::vector<std::vector<torus::Root>> classes_;
  torus::Pattern u_;
};

class FinprodBackend : public Backend {
public:
  // Commuting generators and a subgroup U tidy for all of them (verified at depth).
  FinprodBackend(finprod::Context ctx, std::vector<finprod::Automorphism> gens, finprod::Subgroup u, long depth);
  std::string name() const override { return "finprod"; }
  std::size_t generator_count() const override { return gens_.size(); }
  std::vector<std::string> atoms() const override { return labels_; }
  Rational modulus(std::size_t atom, const Word& w) const override;
  Integer relative_scale(std::size_t atom, const Word& w) const override;
  Integer scale(const Word& w) const override;
  bool fixes_tidy(const Word& w) const override;

  const finprod::Subgroup& atom(std::size_t i) const { return parts_[i]; }
  finprod::Automorphism word(const Word& w) const;

private:
  finprod::Context ctx_;
  std::vector<finprod::Automorphism> gens_;
  finprod::Subgroup u_;
  std::vector<finprod::Subgroup> parts_;
  std::vector<std::string> labels_;
};

// Words in the new basis map to T * w in the old one (T unimodular).
class RebasedBackend : public Backend {
public:
  RebasedBackend(std::shared_ptr<const Backend> base, IntMatrix T);
  std::string name() const override { return base_->name() + " (rebased)"; }
  std::size_t generator_count() const override { return base_->generator_count(); }
  std::vector<std::string> atoms() const override { return base_->atoms(); }
  Rational modulus(std::size_t atom, const Word& w) const override { return base_->modulus(atom, map(w)); }
  Integer relative_scale(std::size_t atom, const Word& w) const override {
    return base_->relative_scale(atom, map(w));
  }
  Integer scale(const Word& w) const override { return base_->scale(map(w)); }
  bool fixes_tidy(const Word& w) const override { return base_->fixes_tidy(map(w)); }

private:
  Word map(const Word& w) const;
  std::shared_ptr<const Backend> base_;
  IntMatrix T_;
};

// Negative control: reports the relative scale of one atom multiplied by `factor`.
class CorruptedBackend : public Backend {
public:
  CorruptedBackend(std::shared_ptr<const Backend> base, std::size_t atom, Integer factor)
      : base_(std::move(base)), atom_(atom), factor_(std::move(factor)) {}
  std::string name() const override { return base_->name() + " (corrupted)"; }
  std::size_t generator_count() const override { return base_->generator_count(); }
  std::vector<std::string> atoms() const override { return base_->atoms(); }
  Rational modulus(std::size_t atom, const Word& w) const override { return base_->modulus(atom, w); }
  Integer relative_scale(std::size_t atom, const Word& w) const override;
  Integer scale(const Word& w) const override { return base_->scale(w); }
  bool fixes_tidy(const Word& w) const override { return base_->fixes_tidy(w); }

private:
  std::shared_ptr<const Backend> base_;
  std::size_t atom_;
  Integer factor_;
};

// ---- invariants ----

// All words with |w|_1 <= len, in a fixed order.
std::vector<Word> words_up_to(std::size_t g, long len);

struct EigenfactorRecord {
  std::vector<std::size_t> atoms; // backend atoms sharing this relative scale function
  std::string label;
  Integer t = 0;               // 0 when no expanding word was found
  std::vector<long> rho;       // over the generator basis
  std::string delta;           // Delta_V as t^(rho . x)
  bool complete = true;
};

std::vector<EigenfactorRecord> relative_scale_table(const Backend& b, long word_len);

struct RankCorank {
  std::size_t factor_number = 0;
  std::size_t rank = 0;
  std::size_t corank_free = 0;
  std::vector<Integer> corank_torsion; // invariant factors > 1
};
IntMatrix rho_matrix(const std::vector<EigenfactorRecord>& recs, std::size_t g);
RankCorank rank_corank(const std::vector<EigenfactorRecord>& recs, std::size_t g);

struct MSet {
  std::vector<std::vector<long>> points; // one per record, in record order
  IntMatrix basis;                      // g x rank, columns represent a basis of H/N
  std::vector<bool> extreme;            // per point
  std::size_t extreme_count = 0;
  std::optional<Integer> doubled_area;  // rank <= 2
  std::string notice;
};
MSet m_set(const std::vector<EigenfactorRecord>& recs, std::size_t g);
// Extreme points of a finite point set, exactly.
std::vector<bool> extreme_points(const std::vector<std::vector<long>>& pts);

std::vector<std::vector<long>> separation_sequence(const std::vector<std::vector<long>>& pts);

struct InvariantsReport {
  std::vector<EigenfactorRecord> records;
  RankCorank rc;
  MSet m;
  std::vector<std::vector<long>> separation;
};
InvariantsReport compute_invariants(const Backend& b, long word_len);

std::vector<Check> verify_suite(const Backend& b, long word_len);

// Permutation of record indices induced by conjugation with `element`.
std::vector<std::size_t> weyl_action(const Backend& b, const std::vector<EigenfactorRecord>& recs,
                                     const RatMatrix& element);

} // namespace tidyscale::invariants
