#pragma once

#include <stdexcept>
#include <string>

namespace attnlab {

// Shape/precondition violations on numeric inputs.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Softmax/selection asked to operate on an empty support set.
class EmptySupportError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid experiment configuration; message carries the field path
// (e.g. "delta.gamma: must be >= 1"). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure; message carries the path. Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace attnlab
