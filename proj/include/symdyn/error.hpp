#pragma once

#include <stdexcept>
#include <string>

namespace symdyn {

// Malformed input files or invalid parameters (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that fails while computing (CLI exit code 3).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured enumeration budget would be exceeded.
class ResourceError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// Graph-level failure: unreachable symbol pair, inadmissible connector, ...
class StructuralError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// An operation was called outside its domain (alpha out of range, short word, ...).
class PreconditionError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace symdyn
