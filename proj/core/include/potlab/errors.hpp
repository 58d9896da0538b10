#pragma once

#include <stdexcept>
#include <string>

namespace potlab {

/// Input violates an operation's precondition (bad dimension, empty list...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed measure, set or points file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LP solver exceeded its iteration cap.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested feature lies outside the supported envelope (e.g. N >= 4 sphere quadrature).
class Unsupported : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace potlab
