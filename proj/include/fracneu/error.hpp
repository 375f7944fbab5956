#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracneu {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDomain : public Error {
 public:
  using Error::Error;
};

/// Exponents or solver options outside their admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A constant (or zero) function where a non-constant one is required.
class DegenerateFunction : public Error {
 public:
  using Error::Error;
};

class ConnectivityError : public Error {
 public:
  ConnectivityError(const std::string& what, std::size_t isolated)
      : Error(what), isolated_(isolated) {}

  /// Number of nodes not reachable from node 0.
  std::size_t isolated_count() const noexcept { return isolated_; }

 private:
  std::size_t isolated_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_lambda,
                   double last_residual, std::size_t iterations)
      : Error(what),
        last_lambda_(last_lambda),
        last_residual_(last_residual),
        iterations_(iterations) {}

  double last_lambda() const noexcept { return last_lambda_; }
  double last_residual() const noexcept { return last_residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double last_lambda_;
  double last_residual_;
  std::size_t iterations_;
};

}  // namespace fracneu
