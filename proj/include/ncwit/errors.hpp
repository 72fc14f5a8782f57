#pragma once

#include <stdexcept>
#include <string>

namespace ncwit {

// Error taxonomy used across the library.  The CLI maps these onto process
// exit codes, so throw the most specific one that applies:
//
//   ValidationError   — input violates a documented invariant (asymmetric
//                       covariance, unphysical state, B_k < -1/2, bad phases).
//   UnsupportedError  — input is well-formed but outside an operation's domain
//                       (e.g. standard-form reduction with C != 0).
//   ConsistencyError  — two internal computations that must agree do not
//                       (radical vs numeric cubic roots, residue checks).
//   CapacityError     — requested truncation order exceeds the engine cap.
//   ParseError        — malformed file / JSON / CLI value.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& msg) : Error(msg) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace ncwit
