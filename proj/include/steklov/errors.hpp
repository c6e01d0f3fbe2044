#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace steklov {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// The requested layer does not fit the perturbation (Jacobian would degenerate).
class LayerTooThinError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class NoSteklovEigenvalues : public Error {
 public:
  using Error::Error;
};

class BasisError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : Error(what), best_residuals_(std::move(best_residuals)) {}

  const std::vector<double>& best_residuals() const { return best_residuals_; }

 private:
  std::vector<double> best_residuals_;
};

}  // namespace steklov
