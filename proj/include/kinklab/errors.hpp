#pragma once

#include <stdexcept>
#include <string>

namespace kinklab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class NonPositiveCurvature : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class NewtonDivergence : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class ConvexityViolation : public Error {
 public:
  using Error::Error;
};

class NoPhaseFound : public Error {
 public:
  using Error::Error;
};

class NotDegenerate : public Error {
 public:
  using Error::Error;
};

class BranchJump : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinklab
