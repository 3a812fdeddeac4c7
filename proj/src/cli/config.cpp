#include <yaml-cpp/yaml.h>

#include <functional>

#include "internal.hpp"

namespace tidyscale::cli {

namespace {

class Parser {
public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& why) const {
    std::string where = origin_;
    if (at.IsDefined() && at.Mark().line >= 0)
      where += ":" + std::to_string(at.Mark().line + 1) + ":" + std::to_string(at.Mark().column + 1);
    throw ConfigError(where + ": " + field + ": " + why);
  }

  YAML::Node need(const YAML::Node& parent, const std::string& key, const std::string& path) const {
    if (!parent.IsMap()) fail(parent, path, "expected a mapping");
    YAML::Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) fail(parent, path + "." + key, "missing");
    return n;
  }

  std::string scalar(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a scalar");
    return n.Scalar();
  }

  Rational rational(const YAML::Node& n, const std::string& field) const {
    try {
      return exactmath::parse_rational(scalar(n, field));
    } catch (const InputError& e) {
      fail(n, field, e.what());
    }
  }

  Integer integer(const YAML::Node& n, const std::string& field) const {
    Rational q = rational(n, field);
    if (q.get_den() != 1) fail(n, field, "expected an integer");
    return q.get_num();
  }

  long small(const YAML::Node& n, const std::string& field) const {
    Integer z = integer(n, field);
    if (!z.fits_slong_p()) fail(n, field, "integer out of range");
    return z.get_si();
  }

  RatMatrix matrix(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence() || n.size() == 0) fail(n, field, "expected a nonempty list of rows");
    const std::size_t r = n.size();
    if (!n[0].IsSequence() || n[0].size() == 0) fail(n[0], field + "[0]", "expected a nonempty row");
    const std::size_t c = n[0].size();
    RatMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      std::string fi = field + "[" + std::to_string(i) + "]";
      if (!n[i].IsSequence() || n[i].size() != c) fail(n[i], fi, "rows must all have " + std::to_string(c) + " entries");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rational(n[i][j], fi + "[" + std::to_string(j) + "]");
    }
    return m;
  }

  std::vector<long> longs(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) fail(n, field, "expected a list");
    std::vector<long> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(small(n[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

  json to_json(const YAML::Node& n) const {
    if (n.IsMap()) {
      json j = json::object();
      for (auto it = n.begin(); it != n.end(); ++it) j[it->first.Scalar()] = to_json(it->second);
      return j;
    }
    if (n.IsSequence()) {
      json j = json::array();
      for (auto it = n.begin(); it != n.end(); ++it) j.push_back(to_json(*it));
      return j;
    }
    if (n.IsScalar()) {
      const std::string& s = n.Scalar();
      if (n.Tag() == "!") return s; // quoted
      if (s == "true") return true;
      if (s == "false") return false;
      // integers stay integers, everything else is kept as a string
      char* end = nullptr;
      long v = std::strtol(s.c_str(), &end, 10);
      if (!s.empty() && *end == '\0') return v;
      return s;
    }
    return nullptr;
  }

private:
  std::string origin_;
};

finprod::FiniteGroup parse_group(const Parser& P, const YAML::Node& n, const std::string& field) {
  if (n.IsScalar()) {
    std::string s = n.Scalar();
    if (s == "s3") return finprod::FiniteGroup::s3();
    if (s == "e8") return finprod::FiniteGroup::e8();
    if (s.rfind("cyclic:", 0) == 0) {
      long k = 0;
      try {
        k = std::stol(s.substr(7));
      } catch (const std::exception&) {
        P.fail(n, field, "bad cyclic order");
      }
      if (k < 1 || k > 64) P.fail(n, field, "cyclic order must be in 1..64");
      return finprod::FiniteGroup::cyclic(unsigned(k));
    }
    P.fail(n, field, "unknown group '" + s + "' (s3, e8, cyclic:N or a table)");
  }
  auto names_n = P.need(n, "names", field);
  auto table_n = P.need(n, "table", field);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < names_n.size(); ++i) names.push_back(P.scalar(names_n[i], field + ".names"));
  auto index_of = [&](const YAML::Node& x, const std::string& f) -> finprod::Elem {
    auto s = P.scalar(x, f);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == s) return finprod::Elem(i);
    P.fail(x, f, "unknown element '" + s + "'");
  };
  std::vector<std::vector<finprod::Elem>> table;
  if (!table_n.IsSequence() || table_n.size() != names.size()) P.fail(table_n, field + ".table", "needs one row per element");
  for (std::size_t i = 0; i < table_n.size(); ++i) {
    std::vector<finprod::Elem> row;
    if (!table_n[i].IsSequence() || table_n[i].size() != names.size())
      P.fail(table_n[i], field + ".table", "row has the wrong length");
    for (std::size_t j = 0; j < names.size(); ++j) row.push_back(index_of(table_n[i][j], field + ".table"));
    table.push_back(row);
  }
  try {
    return finprod::FiniteGroup(names, table);
  } catch (const InputError& e) {
    P.fail(n, field, e.what());
  }
}

finprod::Elem element(const Parser& P, const finprod::FiniteGroup& F, const YAML::Node& n, const std::string& field) {
  try {
    return F.by_name(P.scalar(n, field));
  } catch (const InputError& e) {
    P.fail(n, field, e.what());
  }
}

// "all", "trivial", or a list of generator names.
finprod::Mask subgroup_mask(const Parser& P, const finprod::FiniteGroup& F, const YAML::Node& n,
                            const std::string& field) {
  if (n.IsScalar()) {
    if (n.Scalar() == "all") return F.full();
    if (n.Scalar() == "trivial") return F.trivial();
    return F.generated({element(P, F, n, field)});
  }
  if (!n.IsSequence()) P.fail(n, field, "expected all, trivial or a list of generators");
  std::vector<finprod::Elem> gens;
  for (std::size_t i = 0; i < n.size(); ++i) gens.push_back(element(P, F, n[i], field));
  return F.generated(gens);
}

finprod::Perm group_map(const Parser& P, const finprod::FiniteGroup& F, const YAML::Node& n, const std::string& field) {
  if (n.IsMap() && n["conj"]) return F.conjugation(element(P, F, n["conj"], field + ".conj"));
  if (n.IsMap() && n["map"]) {
    auto m = n["map"];
    if (!m.IsSequence() || m.size() != F.order()) P.fail(m, field + ".map", "needs one image per element");
    finprod::Perm p;
    for (std::size_t i = 0; i < m.size(); ++i) p.push_back(element(P, F, m[i], field + ".map"));
    if (!F.is_automorphism(p)) P.fail(m, field + ".map", "not an automorphism of the fiber group");
    return p;
  }
  if (n.IsScalar() && n.Scalar() == "identity") return F.identity_perm();
  P.fail(n, field, "expected identity, {conj: g} or {map: [...]}");
}

void parse_padic(const Parser& P, const YAML::Node& root, Job& job, const Options& opt) {
  job.prime = opt.prime ? prime_option(*opt.prime) : P.integer(P.need(root, "prime", "config"), "prime");
  if (!exactmath::is_prime(job.prime)) P.fail(root["prime"], "prime", "not a prime");
  auto gens = P.need(root, "generators", "config");
  if (!gens.IsSequence() || gens.size() == 0) P.fail(gens, "generators", "expected a nonempty list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string f = "generators[" + std::to_string(i) + "]";
    job.names.push_back(gens[i]["name"] ? P.scalar(gens[i]["name"], f + ".name") : "g" + std::to_string(i + 1));
    RatMatrix m = P.matrix(P.need(gens[i], "matrix", f), f + ".matrix");
    if (m.rows() != m.cols()) P.fail(gens[i]["matrix"], f + ".matrix", "matrix must be square");
    if (!job.pgens.empty() && m.rows() != job.pgens.front().dim())
      P.fail(gens[i]["matrix"], f + ".matrix", "generators act on different dimensions");
    try {
      job.pgens.emplace_back(m, job.prime);
    } catch (const InputError& e) {
      P.fail(gens[i]["matrix"], f + ".matrix", e.what());
    }
  }
}

void parse_torus(const Parser& P, const YAML::Node& root, Job& job, const Options& opt) {
  job.prime = opt.prime ? prime_option(*opt.prime) : P.integer(P.need(root, "prime", "config"), "prime");
  if (!exactmath::is_prime(job.prime)) P.fail(root["prime"], "prime", "not a prime");
  long n = P.small(P.need(root, "n", "config"), "n");
  if (n < 2 || n > 6) P.fail(root["n"], "n", "expected 2 <= n <= 6");
  job.n = std::size_t(n);
  auto gens = P.need(root, "generators", "config");
  if (!gens.IsSequence() || gens.size() == 0) P.fail(gens, "generators", "expected a nonempty list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string f = "generators[" + std::to_string(i) + "]";
    job.names.push_back(gens[i]["name"] ? P.scalar(gens[i]["name"], f + ".name") : "g" + std::to_string(i + 1));
    auto w = P.longs(P.need(gens[i], "w", f), f + ".w");
    if (w.size() != job.n) P.fail(gens[i]["w"], f + ".w", "expected " + std::to_string(n) + " entries");
    try {
      job.tgens.emplace_back(w);
    } catch (const InputError& e) {
      P.fail(gens[i]["w"], f + ".w", e.what());
    }
  }
}

void parse_finprod(const Parser& P, const YAML::Node& root, Job& job, const Options& opt) {
  auto fib = P.need(root, "fiber", "config");
  auto F = parse_group(P, P.need(fib, "group", "fiber"), "fiber.group");
  long r = fib["r"] ? P.small(fib["r"], "fiber.r") : 1;
  if (r < 1 || r > 16) P.fail(fib["r"], "fiber.r", "expected 1 <= r <= 16");
  auto tails = P.need(root, "tails", "config");
  finprod::Mask TL = subgroup_mask(P, F, P.need(tails, "left", "tails"), "tails.left");
  finprod::Mask TR = subgroup_mask(P, F, P.need(tails, "right", "tails"), "tails.right");
  try {
    job.ctx.emplace(finprod::Ambient(F, unsigned(r), TL, TR), opt.cap);
  } catch (const InputError& e) {
    P.fail(tails, "tails", e.what());
  }
  const auto& amb = job.ctx->ambient();
  auto gens = P.need(root, "generators", "config");
  if (!gens.IsSequence() || gens.size() == 0) P.fail(gens, "generators", "expected a nonempty list");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::string f = "generators[" + std::to_string(i) + "]";
    auto g = gens[i];
    job.names.push_back(g["name"] ? P.scalar(g["name"], f + ".name") : "g" + std::to_string(i + 1));
    long d = g["shift"] ? P.small(g["shift"], f + ".shift") : 0;
    std::vector<unsigned> pi;
    if (g["pi"]) {
      for (long v : P.longs(g["pi"], f + ".pi")) {
        if (v < 0) P.fail(g["pi"], f + ".pi", "negative entry");
        pi.push_back(unsigned(v));
      }
    } else {
      for (long a = 0; a < r; ++a) pi.push_back(unsigned(a));
    }
    finprod::Perm phi = g["phi"] ? group_map(P, F, g["phi"], f + ".phi") : F.identity_perm();
    std::map<long, finprod::Perm> tw;
    if (g["twists"]) {
      auto t = g["twists"];
      if (!t.IsSequence()) P.fail(t, f + ".twists", "expected a list");
      for (std::size_t k = 0; k < t.size(); ++k) {
        std::string tf = f + ".twists[" + std::to_string(k) + "]";
        long at = P.small(P.need(t[k], "at", tf), tf + ".at");
        tw[at] = group_map(P, F, t[k], tf);
      }
    }
    try {
      job.fgens.emplace_back(amb, d, pi, phi, tw);
    } catch (const InputError& e) {
      P.fail(g, f, e.what());
    }
  }
  if (auto s = root["subgroup"]) {
    finprod::Mask tL = s["left"] ? subgroup_mask(P, F, s["left"], "subgroup.left") : TL;
    finprod::Mask tR = s["right"] ? subgroup_mask(P, F, s["right"], "subgroup.right") : TR;
    try {
      if (s["coords"]) {
        std::map<long, finprod::Mask> coords;
        for (auto it = s["coords"].begin(); it != s["coords"].end(); ++it)
          coords[P.small(it->first, "subgroup.coords")] = subgroup_mask(P, F, it->second, "subgroup.coords");
        job.subgroup = job.ctx->product_form(coords, tL, tR);
      } else {
        long b = s["boundary"] ? P.small(s["boundary"], "subgroup.boundary") : 0;
        job.subgroup = job.ctx->tails_only(b, tL, tR);
      }
    } catch (const InputError& e) {
      P.fail(s, "subgroup", e.what());
    }
  } else {
    job.subgroup = job.ctx->tails_only(0, TL, TR);
  }
  if (opt.prime) job.notes.push_back("--prime ignored by the finprod backend");
}

} // namespace

Job parse_job(const std::string& text, const std::string& origin, const Options& opt) {
  Parser P(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(origin + ": expected a mapping at the top level");
  Job job;
  job.backend = P.scalar(P.need(root, "backend", "config"), "backend");
  if (job.backend == "padic") parse_padic(P, root, job, opt);
  else if (job.backend == "torus") parse_torus(P, root, job, opt);
  else if (job.backend == "finprod") parse_finprod(P, root, job, opt);
  else P.fail(root["backend"], "backend", "unknown backend '" + job.backend + "' (padic, torus, finprod)");

  if (auto nz = root["normalizer"]) job.normalizer = P.matrix(nz, "normalizer");
  if (auto g = root["golden"]) job.golden = json{{"results", P.to_json(g)}};
  if (auto fx = root["fixture"]) {
    std::size_t atom = fx["atom"] ? std::size_t(P.small(fx["atom"], "fixture.atom")) : 0;
    Integer factor = fx["factor"] ? P.integer(fx["factor"], "fixture.factor") : Integer(2);
    if (P.scalar(P.need(fx, "kind", "fixture"), "fixture.kind") != "corrupt-relative-scale")
      P.fail(fx["kind"], "fixture.kind", "only corrupt-relative-scale is known");
    job.corrupt = std::make_pair(atom, factor);
  }
  return job;
}

std::shared_ptr<const invariants::Backend> make_backend(const Job& job, const Options& opt) {
  std::shared_ptr<const invariants::Backend> b;
  if (job.backend == "padic") b = std::make_shared<invariants::PadicBackend>(job.pgens);
  else if (job.backend == "torus") b = std::make_shared<invariants::TorusBackend>(job.n, job.prime, job.tgens);
  else b = std::make_shared<invariants::FinprodBackend>(*job.ctx, job.fgens, *job.subgroup, opt.depth);
  if (job.corrupt) {
    if (job.corrupt->first >= b->atoms().size()) throw InputError("fixture.atom out of range");
    b = std::make_shared<invariants::CorruptedBackend>(b, job.corrupt->first, job.corrupt->second);
  }
  return b;
}

} // namespace tidyscale::cli
