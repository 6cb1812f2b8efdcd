#pragma once

#include <stdexcept>
#include <string>

namespace quantsched {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (instance documents, solution files, LP files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input that parses but references unknown entities or breaks an invariant.
class SemanticError : public Error {
 public:
  using Error::Error;
};

// A precondition of a library call was not met.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The LP engine could not complete a solve.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace quantsched
