#pragma once

#include <stdexcept>
#include <string>

namespace qcat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: unnormalized kets, non-Hermitian matrices, bad sizes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The postselected state is orthogonal to the preparation, so quantities
/// normalized by <Phi|Psi> or by the success probability are undefined.
class OrthogonalPostselection : public Error {
 public:
  using Error::Error;
};

/// A shifted meter wavefunction would carry significant weight off the grid.
class GridTooSmall : public Error {
 public:
  using Error::Error;
};

/// A computed quantity violated a physical bound (probability outside
/// [0, 1], negative failure-branch density, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// The failure-branch density went negative; the inputs do not describe
/// one physical preparation.
class PositivityViolation : public ConsistencyError {
 public:
  using ConsistencyError::ConsistencyError;
};

/// The optimization objective is identically zero.
class FlatObjective : public Error {
 public:
  using Error::Error;
};

}  // namespace qcat
