#pragma once

#include <stdexcept>
#include <string>

namespace pe {

// Input violates a type invariant (negative probability, bad sum, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operands live on different domains.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad request from a caller: unknown fixture kind, malformed config, ...
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition the attack relies on does not hold for the given inputs.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace pe
