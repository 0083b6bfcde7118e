#pragma once

#include <stdexcept>
#include <string>

namespace mfa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point lies outside the interval a map or potential is defined on, or a
/// (q, t) pair violates the summability condition qu + t > theta.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A word contains a consecutive pair forbidden by the incidence matrix.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// A configured budget (word count, matrix size) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// System or family parameters are inconsistent (images escape X, overlaps, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not meet its tolerance within budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The requested certified method does not apply to this incidence structure.
class UnsupportedStructureError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unresolved run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfa
