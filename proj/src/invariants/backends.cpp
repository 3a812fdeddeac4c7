#include <algorithm>
#include <numeric>
#include <sstream>

#include "tidyscale/invariants.hpp"

namespace tidyscale::invariants {

using exactmath::to_string;

std::optional<std::vector<Word>> Backend::conjugate_generators(const RatMatrix&) const {
  throw UnsupportedError(name() + " backend does not expose conjugation");
}

std::vector<Check> Backend::backend_checks(long) const { return {}; }

namespace {

std::string word_string(const Word& w) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ")";
  return os.str();
}

void require_word(const Word& w, std::size_t g) {
  if (w.size() != g) throw InputError("word has " + std::to_string(w.size()) + " exponents, expected " +
                                      std::to_string(g));
}

// All 2^g choices of a sign per generator.
std::vector<std::vector<int>> sign_patterns(std::size_t g) {
  std::vector<std::vector<int>> out;
  for (std::size_t bits = 0; bits < (std::size_t(1) << g); ++bits) {
    std::vector<int> s(g);
    for (std::size_t i = 0; i < g; ++i) s[i] = (bits >> i) & 1 ? -1 : 1;
    out.push_back(s);
  }
  return out;
}

// Integer x with W x = target, W of full column rank; nullopt otherwise.
std::optional<Word> integer_solve(const RatMatrix& W, const std::vector<Rational>& target) {
  if (exactmath::rank(W) != W.cols()) throw UnsupportedError("generator data are linearly dependent");
  RatMatrix b(target.size(), 1);
  b.set_column(0, target);
  RatMatrix x;
  try {
    x = exactmath::solve(W, b);
  } catch (const InputError&) {
    return std::nullopt;
  }
  Word out;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x(i, 0).get_den() != 1) return std::nullopt;
    out.push_back(x(i, 0).get_num().get_si());
  }
  return out;
}

} // namespace

// ---- padic ----

PadicBackend::PadicBackend(std::vector<padic::Automorphism> gens) : gens_(std::move(gens)) {
  if (gens_.empty()) throw InputError("empty generator list");
  u_ = padic::common_tidy(gens_);
  // Parts whose slope vectors are positive multiples of each other expand
  // and contract together, so they belong to one eigenfactor.
  std::vector<padic::JointPart> merged;
  for (auto& part : padic::joint_decomposition(gens_)) {
    if (std::all_of(part.slopes.begin(), part.slopes.end(), [](const Rational& s) { return s == 0; })) continue;
    bool placed = false;
    for (auto& m : merged) {
      std::optional<Rational> ratio;
      bool same = true;
      for (std::size_t i = 0; i < part.slopes.size() && same; ++i) {
        if ((part.slopes[i] == 0) != (m.slopes[i] == 0)) same = false;
        else if (part.slopes[i] != 0) {
          Rational r = part.slopes[i] / m.slopes[i];
          if (r <= 0 || (ratio && *ratio != r)) same = false;
          ratio = r;
        }
      }
      if (same) {
        m.basis = hconcat(m.basis, part.basis);
        placed = true;
        break;
      }
    }
    if (!placed) merged.push_back(part);
  }
  for (auto& m : merged) {
    parts_.push_back(padic::meet_subspace(u_, m.basis));
    slopes_.push_back(m.slopes);
    std::string label = "slopes(";
    for (std::size_t i = 0; i < m.slopes.size(); ++i) label += (i ? "," : "") + to_string(m.slopes[i]);
    labels_.push_back(label + ")");
  }
}

padic::Automorphism PadicBackend::word(const Word& w) const {
  require_word(w, gens_.size());
  padic::Automorphism a(RatMatrix::identity(gens_.front().dim()), gens_.front().prime());
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]) a = a * gens_[i].pow(w[i]);
  return a;
}

Rational PadicBackend::modulus(std::size_t atom, const Word& w) const {
  return padic::measure_ratio(padic::image(word(w), parts_.at(atom)), parts_.at(atom));
}

Integer PadicBackend::relative_scale(std::size_t atom, const Word& w) const {
  return padic::index_pair(padic::image(word(w), parts_.at(atom)), parts_.at(atom)).first;
}

Integer PadicBackend::scale(const Word& w) const { return padic::scale(word(w)); }

bool PadicBackend::fixes_tidy(const Word& w) const { return padic::image(word(w), u_) == u_; }

std::optional<std::vector<Word>> PadicBackend::conjugate_generators(const RatMatrix& element) const {
  const std::size_t n = gens_.front().dim();
  const Integer& p = gens_.front().prime();
  if (element.rows() != n || element.cols() != n) throw InputError("conjugating matrix has the wrong shape");
  for (auto& g : gens_)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && g.matrix()(i, j) != 0)
          throw UnsupportedError("padic conjugation needs a diagonal generator family");
  RatMatrix inv = exactmath::inverse(element);
  // Diagonal valuations of the generators, one column each.
  RatMatrix V(n, gens_.size());
  for (std::size_t k = 0; k < gens_.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) V(i, k) = exactmath::valuation(gens_[k].matrix()(i, i), p);
  std::vector<Word> out;
  for (auto& g : gens_) {
    RatMatrix c = inv * g.matrix() * element;
    std::vector<Rational> target(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && c(i, j) != 0) return std::nullopt;
      target[i] = exactmath::valuation(c(i, i), p);
    }
    auto x = integer_solve(V, target);
    if (!x || word(*x).matrix() != c) return std::nullopt;
    out.push_back(*x);
  }
  return out;
}

std::vector<Check> PadicBackend::backend_checks(long word_len) const {
  std::vector<Check> out;
  const std::size_t g = gens_.size();
  const std::size_t n = gens_.front().dim();
  const Integer& p = gens_.front().prime();
  std::vector<padic::Automorphism> letters;
  for (auto& a : gens_) {
    letters.push_back(a);
    letters.push_back(a.inverse());
  }
  auto family_of = [&](const std::vector<int>& s) {
    std::vector<padic::Automorphism> f;
    for (std::size_t i = 0; i < g; ++i) f.push_back(s[i] > 0 ? gens_[i] : gens_[i].inverse());
    return f;
  };
  auto words = words_up_to(g, std::min<long>(word_len, 2));

  Check c49{"Cor 4.9 beta(U_a) = beta(U)_a", true, ""};
  for (auto& s : sign_patterns(g)) {
    auto fam = family_of(s);
    padic::Lattice ua = padic::eigenfactor(u_, fam);
    for (auto& w : words) {
      auto b = word(w);
      if (padic::image(b, ua) != padic::eigenfactor(padic::image(b, u_), fam)) {
        c49.pass = false;
        c49.witness = "beta = " + word_string(w);
      }
    }
  }
  out.push_back(c49);

  // pU is tidy for the whole family and nested in U.
  RatMatrix pI = RatMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) pI(i, i) = Rational(p);
  padic::Lattice v = padic::image(pI, u_);
  Check c412{"Thm 4.12 relative scale independent of the tidy subgroup", true, ""};
  for (auto& s : sign_patterns(g)) {
    auto fam = family_of(s);
    for (auto& beta : letters) {
      Integer a = padic::relative_scale(fam, beta, u_), b = padic::relative_scale(fam, beta, v);
      if (a != b) {
        c412.pass = false;
        c412.witness = to_string(a) + " from U vs " + to_string(b) + " from pU";
      }
    }
  }
  out.push_back(c412);

  Check c414{"Thm 4.14 commutators fix U", true, ""};
  for (auto& a : letters)
    for (auto& b : letters) {
      auto comm = a * b * a.inverse() * b.inverse();
      if (padic::image(comm, u_) != u_) {
        c414.pass = false;
        c414.witness = "commutator moves U";
      }
    }
  out.push_back(c414);

  Check c58{"Prop 5.8 beta(U) = U and alpha tidy imply alpha beta tidy", true, ""};
  std::vector<Word> normalizing;
  for (auto& w : words_up_to(g, word_len))
    if (fixes_tidy(w)) normalizing.push_back(w);
  for (auto& w : words) {
    auto a = word(w);
    if (!padic::is_tidy(a, u_)) {
      c58.pass = false;
      c58.witness = "U not tidy for " + word_string(w);
      continue;
    }
    for (auto& nw : normalizing) {
      if (!padic::is_tidy(a * word(nw), u_)) {
        c58.pass = false;
        c58.witness = word_string(w) + " times " + word_string(nw);
      }
    }
  }
  out.push_back(c58);
  return out;
}

// ---- torus ----

namespace {

// Entries that go to infinity under repeated conjugation by d vanish in the limit.
torus::Pattern limit_part(const torus::Pattern& u, const torus::Diagonal& d) {
  torus::Pattern moved = torus::conjugate(u, d);
  auto b = u.bounds();
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i != j && b[i][j] != torus::kAbsent && moved.at(i, j) > b[i][j]) b[i][j] = torus::kAbsent;
  return torus::Pattern(b);
}

} // namespace

TorusBackend::TorusBackend(std::size_t n, Integer prime, std::vector<torus::Diagonal> gens)
    : n_(n), p_(std::move(prime)), gens_(std::move(gens)), roots_(torus::roots(n)), u_(torus::Pattern::iwahori(n)) {
  exactmath::require_prime(p_);
  if (gens_.empty()) throw InputError("empty generator list");
  for (auto& d : gens_)
    if (d.w.size() != n_) throw InputError("diagonal generator has the wrong length");
  std::vector<std::vector<long>> rays;
  for (auto& r : roots_) {
    std::vector<long> rho;
    for (auto& d : gens_) rho.push_back(d.w[r.j] - d.w[r.i]);
    long g = 0;
    for (long x : rho) g = std::gcd(g, x);
    if (g == 0) continue; // fixed by every generator: part of U_0
    for (long& x : rho) x /= g;
    auto it = std::find(rays.begin(), rays.end(), rho);
    if (it == rays.end()) {
      rays.push_back(rho);
      classes_.push_back({r});
    } else {
      classes_[std::size_t(it - rays.begin())].push_back(r);
    }
  }
}

std::vector<std::string> TorusBackend::atoms() const {
  std::vector<std::string> out;
  for (auto& c : classes_) {
    std::string label = c.size() == 1 ? "root" : "roots";
    for (auto& r : c) label += r.label();
    out.push_back(label);
  }
  return out;
}

torus::Diagonal TorusBackend::word(const Word& w) const {
  require_word(w, gens_.size());
  torus::Diagonal d(std::vector<long>(n_, 0));
  for (std::size_t i = 0; i < w.size(); ++i) d = d + gens_[i] * w[i];
  return d;
}

// The class is a product of root subgroups on which conjugation acts entrywise.
Rational TorusBackend::modulus(std::size_t atom, const Word& w) const {
  Rational m = 1;
  auto d = word(w);
  for (auto& r : classes_.at(atom)) m *= torus::root_modulus(r, d, p_);
  return m;
}

Integer TorusBackend::relative_scale(std::size_t atom, const Word& w) const {
  Integer s = 1;
  auto d = word(w);
  for (auto& r : classes_.at(atom)) s *= torus::root_relative_scale(r, d, p_);
  return s;
}

Integer TorusBackend::scale(const Word& w) const { return torus::scale(word(w), u_, p_); }

bool TorusBackend::fixes_tidy(const Word& w) const { return torus::conjugate(u_, word(w)) == u_; }

std::optional<std::vector<Word>> TorusBackend::conjugate_generators(const RatMatrix& element) const {
  if (element.rows() != n_ || element.cols() != n_) throw InputError("conjugating matrix has the wrong shape");
  std::vector<std::size_t> sigma(n_, n_);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i < n_; ++i) {
      const Rational& x = element(i, j);
      if (x == 0) continue;
      if (x != 1 || sigma[j] != n_) throw InputError("torus conjugation needs a permutation matrix");
      sigma[j] = i;
    }
  for (auto s : sigma)
    if (s == n_) throw InputError("torus conjugation needs a permutation matrix");
  RatMatrix W(n_, gens_.size());
  for (std::size_t k = 0; k < gens_.size(); ++k)
    for (std::size_t i = 0; i < n_; ++i) W(i, k) = gens_[k].w[i];
  std::vector<Word> out;
  for (auto& d : gens_) {
    std::vector<Rational> target(n_);
    for (std::size_t i = 0; i < n_; ++i) target[i] = d.w[sigma[i]];
    auto x = integer_solve(W, target);
    if (!x) return std::nullopt;
    out.push_back(*x);
  }
  return out;
}

std::vector<Check> TorusBackend::backend_checks(long word_len) const {
  std::vector<Check> out;
  const std::size_t g = gens_.size();
  auto words = words_up_to(g, std::min<long>(word_len, 2));
  auto ua_of = [&](const torus::Pattern& u, const std::vector<int>& s) {
    torus::Pattern r = u;
    for (std::size_t i = 0; i < g; ++i) r = torus::intersect(r, limit_part(u, gens_[i] * (-s[i])));
    return r;
  };

  Check c49{"Cor 4.9 beta(U_a) = beta(U)_a", true, ""};
  for (auto& s : sign_patterns(g))
    for (auto& w : words) {
      auto d = word(w);
      if (torus::conjugate(ua_of(u_, s), d) != ua_of(torus::conjugate(u_, d), s)) {
        c49.pass = false;
        c49.witness = "beta = " + word_string(w);
      }
    }
  out.push_back(c49);

  // Shifting every off-diagonal bound by one gives a nested tidy subgroup.
  auto b = u_.bounds();
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j) b[i][j] += 1;
  torus::Pattern v(b);
  Check c412{"Thm 4.12 relative scale independent of the tidy subgroup", true, ""};
  for (auto& s : sign_patterns(g))
    for (std::size_t k = 0; k < g; ++k)
      for (long e : {1L, -1L}) {
        auto beta = gens_[k] * e;
        auto rel = [&](const torus::Pattern& u) {
          torus::Pattern plus = torus::intersect(ua_of(u, s), limit_part(u, beta));
          return torus::pattern_index(plus, torus::conjugate(plus, beta), p_);
        };
        Integer a = rel(u_), c = rel(v);
        if (a != c) {
          c412.pass = false;
          c412.witness = to_string(a) + " from U vs " + to_string(c) + " from the nested subgroup";
        }
      }
  out.push_back(c412);

  Check c414{"Thm 4.14 commutators fix U", true, ""};
  for (auto& x : gens_)
    for (auto& y : gens_) {
      auto r = torus::conjugate(torus::conjugate(torus::conjugate(torus::conjugate(u_, y * -1), x * -1), y), x);
      if (r != u_) {
        c414.pass = false;
        c414.witness = "commutator moves U";
      }
    }
  out.push_back(c414);

  // The scale of a diagonal element is the product of max(p^{w_j - w_i}, 1).
  auto known_scale = [&](const torus::Diagonal& d) {
    Integer s = 1;
    for (auto& r : roots_) {
      long e = d.w[r.j] - d.w[r.i];
      if (e > 0) s *= exactmath::ipow(p_, e);
    }
    return s;
  };
  Check c58{"Prop 5.8 beta(U) = U and alpha tidy imply alpha beta tidy", true, ""};
  std::vector<Word> normalizing;
  for (auto& w : words_up_to(g, word_len))
    if (fixes_tidy(w)) normalizing.push_back(w);
  for (auto& w : words) {
    if (torus::scale(word(w), u_, p_) != known_scale(word(w))) {
      c58.pass = false;
      c58.witness = "U not tidy for " + word_string(w);
      continue;
    }
    for (auto& nw : normalizing) {
      auto d = word(w) + word(nw);
      if (torus::scale(d, u_, p_) != known_scale(d)) {
        c58.pass = false;
        c58.witness = word_string(w) + " times " + word_string(nw);
      }
    }
  }
  out.push_back(c58);
  return out;
}

// ---- finprod ----

FinprodBackend::FinprodBackend(finprod::Context ctx, std::vector<finprod::Automorphism> gens, finprod::Subgroup u,
                               long depth)
    : ctx_(std::move(ctx)), gens_(std::move(gens)), u_(std::move(u)) {
  if (gens_.empty()) throw InputError("empty generator list");
  for (std::size_t i = 0; i < gens_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (!(gens_[i] * gens_[j] == gens_[j] * gens_[i])) throw UnsupportedError("generators do not commute");
  for (auto& a : gens_)
    if (!finprod::is_tidy(ctx_, a, u_, depth))
      throw PreconditionError("the supplied subgroup is not tidy for every generator");
  const std::size_t g = gens_.size();
  for (auto& s : sign_patterns(g)) {
    finprod::Subgroup v = u_;
    for (std::size_t i = 0; i < g; ++i)
      v = ctx_.intersect(v, finprod::exact_forward_part(ctx_, s[i] > 0 ? gens_[i] : gens_[i].inverse(), u_));
    if (std::find(parts_.begin(), parts_.end(), v) != parts_.end()) continue;
    bool moves = false;
    for (std::size_t i = 0; i < g && !moves; ++i) moves = ctx_.measure_ratio(ctx_.apply(gens_[i], v), v) != 1;
    if (!moves) continue;
    parts_.push_back(v);
    std::string label = "U_{";
    for (std::size_t i = 0; i < g; ++i) label += (i ? "," : "") + std::string(s[i] > 0 ? "+" : "-");
    labels_.push_back(label + "}");
  }
}

finprod::Automorphism FinprodBackend::word(const Word& w) const {
  require_word(w, gens_.size());
  auto a = finprod::Automorphism::identity(ctx_.ambient());
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i]) a = a * gens_[i].pow(w[i]);
  return a;
}

Rational FinprodBackend::modulus(std::size_t atom, const Word& w) const {
  auto& v = parts_.at(atom);
  return ctx_.measure_ratio(ctx_.apply(word(w), v), v);
}

Integer FinprodBackend::relative_scale(std::size_t atom, const Word& w) const {
  auto& v = parts_.at(atom);
  return ctx_.index(ctx_.apply(word(w), v), v);
}

Integer FinprodBackend::scale(const Word& w) const { return ctx_.displacement(word(w), u_); }

bool FinprodBackend::fixes_tidy(const Word& w) const { return ctx_.apply(word(w), u_) == u_; }

// ---- wrappers ----

RebasedBackend::RebasedBackend(std::shared_ptr<const Backend> base, IntMatrix T) : base_(std::move(base)), T_(std::move(T)) {
  const std::size_t g = base_->generator_count();
  if (T_.rows() != g || T_.cols() != g) throw InputError("basis change has the wrong shape");
  Rational det = exactmath::determinant(exactmath::to_rational(T_));
  if (det != 1 && det != -1) throw InputError("basis change is not unimodular");
}

Word RebasedBackend::map(const Word& w) const {
  require_word(w, T_.cols());
  Word out(T_.rows(), 0);
  for (std::size_t i = 0; i < T_.rows(); ++i)
    for (std::size_t j = 0; j < T_.cols(); ++j) out[i] += T_(i, j).get_si() * w[j];
  return out;
}

Integer CorruptedBackend::relative_scale(std::size_t atom, const Word& w) const {
  Integer s = base_->relative_scale(atom, w);
  return atom == atom_ && s > 1 ? Integer(s * factor_) : s;
}

} // namespace tidyscale::invariants
