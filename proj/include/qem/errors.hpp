#pragma once

#include <stdexcept>
#include <string>

namespace qem {

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BasisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct MitigationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecompositionError : std::runtime_error {
  explicit DecompositionError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

struct ExecutorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qem
