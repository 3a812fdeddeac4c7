#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tidyscale/errors.hpp"

// Configuration-driven front end shared by the tidyscale tool, the
// acceptance runner and the Python module.
namespace tidyscale::cli {

using json = nlohmann::json;

// Malformed config: the message carries "path:line:col: field: reason".
struct ConfigError : InputError {
  using InputError::InputError;
};

struct Options {
  long depth = 8;
  double cap = 1e6;
  long word_len = 6;
  std::optional<std::string> prime; // overrides the config prime
};

struct LedgerEntry {
  std::string name;
  bool pass = true;
  std::string witness;
  bool operator==(const LedgerEntry&) const = default;
};

struct Report {
  std::string command;
  json results = json::object();
  std::vector<LedgerEntry> ledger;
  std::vector<std::string> flags; // truncation / depth-only verdicts
  double seconds = 0;            // human form only

  bool ok() const;
  void check(const std::string& name, bool pass, const std::string& witness = "");
  // Machine form. Timing is left out so that reports are byte-identical.
  json to_json() const;
  static Report from_json(const json& j);
  std::string machine() const; // to_json().dump(2) + "\n"
  std::string human() const;
  bool operator==(const Report& o) const {
    return command == o.command && results == o.results && ledger == o.ledger && flags == o.flags;
  }
};

inline const std::vector<std::string> kCommands = {"scale", "tidy", "eigenfactors", "invariants", "verify", "example"};
inline const std::vector<std::string> kExamples = {"3.5", "5.7", "6.10", "6.11", "6.17"};

// Run a config-driven command.
Report run_config(const std::string& command, const std::string& config_path, const Options& opt);
// Same, from config text (`origin` names it in error messages).
Report run_config_text(const std::string& command, const std::string& text, const std::string& origin,
                       const Options& opt);

// Built-in reproduction; golden values are diffed when `golden_dir` holds
// <name>.golden.json.
Report run_example(const std::string& name, const Options& opt, const std::optional<std::string>& golden_dir);
// Compare every leaf of golden["results"] with the report, adding ledger entries.
void diff_golden(Report& rep, const json& golden);

std::string default_golden_dir();

// 0 ok, 1 verification failure, 2 input error, 3 resource cap.
int exit_code_for(const Report& rep);

// The tidyscale command line: argv[0] is skipped. Human report to `out`,
// diagnostics to `err`.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tidyscale::cli
