#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "tidyscale/cli.hpp"

namespace tidyscale::cli {

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scale functions, tidy subgroups and invariants of abelian automorphism groups", "tidyscale"};
  std::string command, name, config, out_path, golden_dir = default_golden_dir();
  Options opt;
  std::string prime;
  app.add_option("command", command, "scale | tidy | eigenfactors | invariants | verify | example")->required();
  app.add_option("name", name, "example name for `example`");
  app.add_option("--config", config, "job config (YAML)");
  app.add_option("--out", out_path, "write the machine-readable report here");
  app.add_option("--depth", opt.depth, "finprod depth bound")->check(CLI::PositiveNumber);
  app.add_option("--cap", opt.cap, "enumeration cap")->check(CLI::PositiveNumber);
  app.add_option("--word-len", opt.word_len, "word-length bound")->check(CLI::PositiveNumber);
  app.add_option("--prime", prime, "override the prime");
  app.add_option("--golden-dir", golden_dir, "directory of example golden files");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "tidyscale: " << e.what() << "\n";
    return 2;
  }
  if (!prime.empty()) opt.prime = prime;

  try {
    Report rep;
    if (command == "example") {
      if (name.empty()) throw InputError("example needs a name (3.5, 5.7, 6.10, 6.11, 6.17)");
      if (!config.empty()) throw InputError("example takes no --config");
      rep = run_example(name, opt, golden_dir);
    } else {
      if (!name.empty()) throw InputError("unexpected argument '" + name + "'");
      if (config.empty()) throw InputError(command + " needs --config");
      rep = run_config(command, config, opt);
    }
    if (!out_path.empty()) {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + out_path);
      f << rep.machine();
    }
    out << rep.human();
    return exit_code_for(rep);
  } catch (const ResourceError& e) {
    err << "tidyscale: resource cap exceeded: " << e.what() << " (cardinality " << e.cardinality << ")\n";
    return 3;
  } catch (const InputError& e) {
    err << "tidyscale: input error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    err << "tidyscale: unsupported: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "tidyscale: precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const CommensurabilityError& e) {
    err << "tidyscale: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "tidyscale: internal error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace tidyscale::cli
