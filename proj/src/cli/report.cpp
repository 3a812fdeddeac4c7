#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tidyscale/cli.hpp"

namespace tidyscale::cli {

bool Report::ok() const {
  return std::all_of(ledger.begin(), ledger.end(), [](const LedgerEntry& e) { return e.pass; });
}

void Report::check(const std::string& name, bool pass, const std::string& witness) {
  ledger.push_back({name, pass, witness});
}

json Report::to_json() const {
  json j;
  j["command"] = command;
  j["results"] = results;
  j["ledger"] = json::array();
  for (auto& e : ledger) j["ledger"].push_back({{"name", e.name}, {"pass", e.pass}, {"witness", e.witness}});
  j["flags"] = flags;
  j["ok"] = ok();
  return j;
}

Report Report::from_json(const json& j) {
  Report r;
  try {
    r.command = j.at("command").get<std::string>();
    r.results = j.at("results");
    for (auto& e : j.at("ledger"))
      r.ledger.push_back({e.at("name").get<std::string>(), e.at("pass").get<bool>(), e.at("witness").get<std::string>()});
    r.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed report: ") + ex.what());
  }
  if (j.contains("ok") && j.at("ok").get<bool>() != r.ok()) throw InputError("malformed report: inconsistent ok field");
  return r;
}

std::string Report::machine() const { return to_json().dump(2) + "\n"; }

std::string Report::human() const {
  std::ostringstream os;
  os << "command: " << command << "\n";
  auto flat = results.flatten();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    os << "  " << it.key() << " = ";
    if (it->is_string()) os << it->get<std::string>();
    else os << it->dump();
    os << "\n";
  }
  for (auto& e : ledger) {
    os << (e.pass ? "PASS " : "FAIL ") << e.name;
    if (!e.witness.empty()) os << " [" << e.witness << "]";
    os << "\n";
  }
  for (auto& f : flags) os << "note: " << f << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  os << (ok() ? "ok" : "verification failed") << " (" << buf << " s)\n";
  return os.str();
}

int exit_code_for(const Report& rep) { return rep.ok() ? 0 : 1; }

namespace {

// Objects recurse; arrays and scalars compare whole.
void diff_node(Report& rep, const json& want, const json& have, const std::string& path) {
  if (want.is_object()) {
    for (auto it = want.begin(); it != want.end(); ++it) {
      std::string sub = path + "/" + it.key();
      if (!have.is_object() || !have.contains(it.key())) rep.check("golden " + sub, false, "missing from the report");
      else diff_node(rep, *it, have.at(it.key()), sub);
    }
    return;
  }
  rep.check("golden " + path, want == have, want == have ? "" : "got " + have.dump() + ", expected " + want.dump());
}

} // namespace

void diff_golden(Report& rep, const json& golden) {
  if (!golden.contains("results")) throw InputError("golden file has no results section");
  diff_node(rep, golden.at("results"), rep.results, "");
}

} // namespace tidyscale::cli
