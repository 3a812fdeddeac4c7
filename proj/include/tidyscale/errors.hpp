#pragma once

#include <stdexcept>
#include <string>

namespace tidyscale {

// Bad user input: malformed numbers, non-prime p, wrong shapes.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : InputError {
  using InputError::InputError;
};

// A rational-irreducible factor of the characteristic polynomial whose
// Newton polygon has more than one segment.
struct SlopeSeparabilityError : InputError {
  using InputError::InputError;
};

// Valid input outside what a backend implements (non-commuting families...).
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A conjugating element that does not normalize the generator family.
struct NormalizationError : InputError {
  using InputError::InputError;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommensurabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration cap exceeded. `cardinality` is the offending size.
struct ResourceError : std::runtime_error {
  double cardinality;
  ResourceError(const std::string& what, double card)
      : std::runtime_error(what), cardinality(card) {}
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace tidyscale
