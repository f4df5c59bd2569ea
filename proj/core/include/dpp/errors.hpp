#pragma once

#include <stdexcept>
#include <string>

namespace dpp {

// Malformed input: non-finite values, dimension mismatches, bad schemas.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (t = 0, negative norms).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// NaN or divergence inside an iterative solver.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synchronous message-passing contract broken (missing or duplicated message).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Brute-force search exhausted its grid without an answer.
class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpp
