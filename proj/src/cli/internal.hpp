#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tidyscale/cli.hpp"
#include "tidyscale/finprod.hpp"
#include "tidyscale/invariants.hpp"
#include "tidyscale/padic.hpp"
#include "tidyscale/torus.hpp"

namespace tidyscale::cli {

struct Job {
  std::string backend; // padic | torus | finprod
  std::vector<std::string> names;
  // padic
  std::vector<padic::Automorphism> pgens;
  // torus
  std::size_t n = 0;
  Integer prime = 0;
  std::vector<torus::Diagonal> tgens;
  // finprod
  std::optional<finprod::Context> ctx;
  std::vector<finprod::Automorphism> fgens;
  std::optional<finprod::Subgroup> subgroup;

  std::optional<RatMatrix> normalizer;
  std::optional<json> golden;
  std::optional<std::pair<std::size_t, Integer>> corrupt; // atom, factor
  std::vector<std::string> notes;
};

Job parse_job(const std::string& text, const std::string& origin, const Options& opt);

// The --prime flag, validated.
Integer prime_option(const std::string& s);

std::shared_ptr<const invariants::Backend> make_backend(const Job& job, const Options& opt);

// JSON pieces shared by commands and examples.
std::string str(const Rational& q);
std::string str(const Integer& z);
json matrix_json(const RatMatrix& m);
json invariants_json(const invariants::InvariantsReport& rep);
void add_checks(Report& rep, const std::vector<invariants::Check>& checks, const std::string& prefix = "");
json trace_json(const finprod::Context& ctx, const finprod::TidyingTrace& tr);

} // namespace tidyscale::cli
