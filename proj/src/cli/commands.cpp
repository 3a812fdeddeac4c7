#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "internal.hpp"

namespace tidyscale::cli {

std::string str(const Rational& q) { return exactmath::to_string(q); }
std::string str(const Integer& z) { return exactmath::to_string(z); }

json matrix_json(const RatMatrix& m) {
  json j = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(str(m(i, k)));
    j.push_back(row);
  }
  return j;
}

json invariants_json(const invariants::InvariantsReport& rep) {
  json j;
  j["records"] = json::array();
  for (auto& r : rep.records)
    j["records"].push_back(
        {{"label", r.label}, {"t", str(r.t)}, {"rho", r.rho}, {"delta", r.delta}, {"complete", r.complete}});
  j["factor_number"] = rep.rc.factor_number;
  j["rank"] = rep.rc.rank;
  json tors = json::array();
  for (auto& d : rep.rc.corank_torsion) tors.push_back(str(d));
  j["corank"] = {{"free_rank", rep.rc.corank_free}, {"torsion", tors}};
  auto pts = rep.m.points;
  std::sort(pts.begin(), pts.end());
  j["M_H"] = pts;
  json basis = json::array();
  for (std::size_t c = 0; c < rep.m.basis.cols(); ++c) {
    json col = json::array();
    for (std::size_t r = 0; r < rep.m.basis.rows(); ++r) col.push_back(rep.m.basis(r, c).get_si());
    basis.push_back(col);
  }
  j["basis"] = basis;
  if (rep.m.notice.empty()) {
    j["extreme_count"] = rep.m.extreme_count;
    if (rep.m.doubled_area) j["doubled_hull_area"] = str(*rep.m.doubled_area);
  } else {
    j["hull_notice"] = rep.m.notice;
  }
  j["separation"] = rep.separation;
  return j;
}

void add_checks(Report& rep, const std::vector<invariants::Check>& checks, const std::string& prefix) {
  for (auto& c : checks) rep.check(prefix + c.name, c.pass, c.witness);
}

json trace_json(const finprod::Context& ctx, const finprod::TidyingTrace& tr) {
  json j;
  j["U"] = ctx.to_string(tr.U);
  j["V"] = ctx.to_string(tr.V);
  j["step1_n"] = tr.step1_n;
  j["step1_ok"] = tr.step1_ok;
  json idx = json::array();
  for (auto& x : tr.step1_indices) idx.push_back(str(x));
  j["step1_indices"] = idx;
  j["K"] = ctx.to_string(tr.K);
  j["V2"] = ctx.to_string(tr.V2);
  j["W"] = ctx.to_string(tr.W);
  j["W_is_group"] = tr.W_is_group;
  j["W_T1"] = {{"holds", tr.W_T1.holds}, {"exact", tr.W_T1.exact}};
  j["W_T2"] = {{"holds", tr.W_T2.holds}, {"exact", tr.W_T2.exact}};
  j["W_index"] = str(tr.W_index);
  j["index_minimal"] = tr.index_minimal;
  return j;
}

namespace {

json lattice_json(const padic::Lattice& l) { return {{"basis", matrix_json(l.basis())}, {"display", l.to_string()}}; }

std::string word_name(const std::vector<std::string>& names, std::size_t i) { return names.at(i); }

void depth_flags(Report& rep, const std::string& who, const finprod::TidyingTrace& tr) {
  if (tr.W_T1.holds && !tr.W_T1.exact) rep.flags.push_back(who + ": T1 holds at depth only");
  if (tr.W_T2.holds && !tr.W_T2.exact) rep.flags.push_back(who + ": T2 holds at depth only");
}

json scales_json(const Job& job, const invariants::Backend& b) {
  json j = json::object();
  const std::size_t g = job.names.size();
  for (std::size_t i = 0; i < g; ++i) {
    invariants::Word w(g, 0);
    w[i] = 1;
    json e;
    e["s"] = str(b.scale(w));
    w[i] = -1;
    e["s_inverse"] = str(b.scale(w));
    j[word_name(job.names, i)] = e;
  }
  return j;
}

void cmd_scale(const Job& job, const Options& opt, Report& rep) {
  if (job.backend == "padic") {
    for (std::size_t i = 0; i < job.pgens.size(); ++i) {
      auto& a = job.pgens[i];
      json e;
      Integer s = padic::scale(a), si = padic::scale(a.inverse());
      e["s"] = str(s);
      e["s_inverse"] = str(si);
      json vals = json::array();
      auto dec = padic::slope_decomposition(a);
      for (auto& part : dec.parts) vals.push_back({{"valuation", str(part.slope)}, {"multiplicity", part.dim()}});
      e["root_valuations"] = vals;
      rep.results["scales"][job.names[i]] = e;
      Rational q = Rational(s) / Rational(si);
      Rational expect = exactmath::rpow(job.prime, -exactmath::valuation(exactmath::determinant(a.matrix()), job.prime));
      rep.check("S3 " + job.names[i] + ": s/s^-1 = p^-v(det)", q == expect, str(q) + " vs " + str(expect));
    }
    return;
  }
  if (job.backend == "torus") {
    auto u = torus::Pattern::iwahori(job.n);
    for (std::size_t i = 0; i < job.tgens.size(); ++i) {
      auto& d = job.tgens[i];
      json e;
      Integer s = torus::scale(d, u, job.prime);
      e["s"] = str(s);
      e["s_inverse"] = str(torus::scale(d * -1, u, job.prime));
      Integer prod = 1;
      for (auto& r : torus::roots(job.n)) prod *= torus::root_relative_scale(r, d, job.prime);
      e["root_product"] = str(prod);
      rep.results["scales"][job.names[i]] = e;
      rep.check("Thm 6.12 " + job.names[i] + ": Iwahori scale = product of root scales", s == prod);
    }
    return;
  }
  for (std::size_t i = 0; i < job.fgens.size(); ++i) {
    auto tr = finprod::tidying_procedure(*job.ctx, job.fgens[i], *job.subgroup, opt.depth);
    json e;
    e["s"] = str(tr.W_index);
    e["W"] = job.ctx->to_string(tr.W);
    rep.results["scales"][job.names[i]] = e;
    rep.check(job.names[i] + ": tidying procedure returns a tidy subgroup",
              tr.W_is_group && tr.W_T1.holds && tr.W_T2.holds);
    depth_flags(rep, job.names[i], tr);
  }
}

void cmd_tidy(const Job& job, const Options& opt, Report& rep) {
  if (job.backend == "padic") {
    for (std::size_t i = 0; i < job.pgens.size(); ++i) {
      auto l = padic::step1_tidy(job.pgens[i]);
      rep.results["tidy"][job.names[i]] = lattice_json(l);
      rep.check(job.names[i] + ": tidy", padic::is_tidy(job.pgens[i], l));
      rep.check(job.names[i] + ": displacement = Newton scale",
                padic::displacement(job.pgens[i], l) == padic::scale(job.pgens[i]));
    }
    if (job.pgens.size() > 1) {
      auto u = padic::common_tidy(job.pgens);
      rep.results["common_tidy"] = lattice_json(u);
      for (std::size_t i = 0; i < job.pgens.size(); ++i)
        rep.check("common tidy for " + job.names[i], padic::is_tidy(job.pgens[i], u));
    }
    return;
  }
  if (job.backend == "torus") {
    auto u = torus::Pattern::iwahori(job.n);
    rep.results["common_tidy"] = u.to_string();
    for (std::size_t i = 0; i < job.tgens.size(); ++i) {
      auto& d = job.tgens[i];
      Integer prod = 1;
      for (auto& r : torus::roots(job.n)) prod *= torus::root_relative_scale(r, d, job.prime);
      rep.check("Iwahori subgroup tidy for " + job.names[i], torus::scale(d, u, job.prime) == prod);
    }
    return;
  }
  for (std::size_t i = 0; i < job.fgens.size(); ++i) {
    auto tr = finprod::tidying_procedure(*job.ctx, job.fgens[i], *job.subgroup, opt.depth);
    rep.results["tidy"][job.names[i]] = trace_json(*job.ctx, tr);
    rep.check(job.names[i] + ": W is tidy", tr.W_is_group && tr.W_T1.holds && tr.W_T2.holds);
    depth_flags(rep, job.names[i], tr);
  }
  if (job.fgens.size() > 1) {
    auto s = finprod::common_tidy_iterative(*job.ctx, job.fgens, *job.subgroup, opt.depth);
    json e = {{"found", s.found}, {"exhausted", s.exhausted}, {"depth_used", s.depth_used}, {"candidates", s.candidates}};
    if (s.found) e["result"] = job.ctx->to_string(s.result);
    if (!s.note.empty()) e["note"] = s.note;
    rep.results["common_tidy"] = e;
    if (!s.found)
      rep.flags.push_back(s.exhausted ? "no common tidy subgroup: search exhausted (consistency, not proof)"
                                      : "no common tidy subgroup within depth");
  }
}

void record_flags(Report& rep, const invariants::InvariantsReport& inv) {
  for (auto& r : inv.records)
    if (!r.complete) rep.flags.push_back("t_V of " + r.label + " not realized within the word length");
}

void cmd_eigenfactors(const Job& job, const Options& opt, Report& rep) {
  auto b = make_backend(job, opt);
  auto recs = invariants::relative_scale_table(*b, opt.word_len);
  invariants::InvariantsReport inv;
  inv.records = recs;
  json atoms = json::array();
  auto labels = b->atoms();
  for (std::size_t a = 0; a < labels.size(); ++a) {
    json e = {{"label", labels[a]}};
    if (auto* fp = dynamic_cast<const invariants::FinprodBackend*>(b.get())) e["subgroup"] = job.ctx->to_string(fp->atom(a));
    atoms.push_back(e);
  }
  rep.results["atoms"] = atoms;
  rep.results["records"] = invariants_json(inv)["records"];
  record_flags(rep, inv);
}

void cmd_invariants(const Job& job, const Options& opt, Report& rep) {
  auto b = make_backend(job, opt);
  auto inv = invariants::compute_invariants(*b, opt.word_len);
  rep.results["invariants"] = invariants_json(inv);
  record_flags(rep, inv);
  if (job.normalizer) {
    auto perm = invariants::weyl_action(*b, inv.records, *job.normalizer);
    json w = json::array();
    for (std::size_t i = 0; i < perm.size(); ++i) w.push_back({inv.records[i].label, inv.records[perm[i]].label});
    rep.results["weyl_action"] = w;
  }
}

void cmd_verify(const Job& job, const Options& opt, Report& rep) {
  auto b = make_backend(job, opt);
  auto inv = invariants::compute_invariants(*b, opt.word_len);
  rep.results["invariants"] = invariants_json(inv);
  rep.results["scales"] = scales_json(job, *b);
  record_flags(rep, inv);
  add_checks(rep, invariants::verify_suite(*b, opt.word_len));
  if (job.golden) diff_golden(rep, *job.golden);
}

} // namespace

Report run_config_text(const std::string& command, const std::string& text, const std::string& origin,
                       const Options& opt) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw InputError("unknown command '" + command + "'");
  if (command == "example") throw InputError("example takes a name, not a config");
  auto t0 = std::chrono::steady_clock::now();
  Job job = parse_job(text, origin, opt);
  Report rep;
  rep.command = command;
  rep.results["backend"] = job.backend;
  rep.results["generators"] = job.names;
  rep.flags = job.notes;
  if (command == "scale") cmd_scale(job, opt, rep);
  else if (command == "tidy") cmd_tidy(job, opt, rep);
  else if (command == "eigenfactors") cmd_eigenfactors(job, opt, rep);
  else if (command == "invariants") cmd_invariants(job, opt, rep);
  else cmd_verify(job, opt, rep);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

Report run_config(const std::string& command, const std::string& config_path, const Options& opt) {
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot read config " + config_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_text(command, ss.str(), config_path, opt);
}

} // namespace tidyscale::cli
