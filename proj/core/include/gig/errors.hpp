#pragma once

#include <stdexcept>
#include <string>

namespace gig {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or weight dimensions do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Class index outside [0, num_classes).
class TargetError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range or degenerate argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Training or optimisation produced a non-finite objective.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Source and sink live in different graph components.
class ConnectivityError : public Error {
 public:
  using Error::Error;
};

/// A test fixture does not have the property it claims (e.g. symmetry).
class FixtureError : public Error {
 public:
  using Error::Error;
};

/// Malformed model, dataset or config file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gig
