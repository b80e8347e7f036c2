#pragma once

#include <stdexcept>
#include <string>

namespace ttpc {

/// A state or dataset arrived in a quadrature/vacuum convention the
/// operation cannot interpret (e.g. criterion bounds demand v0 = 1/4).
class ConventionMismatchError : public std::invalid_argument {
 public:
  explicit ConventionMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// An input matrix or combination is degenerate where the operation
/// needs it invertible / non-null (e.g. zero-variance gain slot).
class SingularInputError : public std::invalid_argument {
 public:
  explicit SingularInputError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Numerics broke down at runtime (factorization failure beyond jitter
/// tolerance, non-convergence where convergence is contractual).
class NumericalFailureError : public std::runtime_error {
 public:
  explicit NumericalFailureError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Malformed external input: JSON config or CSV rows. Message carries
/// the offending key / line number.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ttpc
