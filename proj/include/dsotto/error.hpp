#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsotto {

// Invalid numeric input (negative index, empty radicand, out-of-range parameter).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal inconsistency in the ECS matrix assembly (index or sign bug).
class BasisAssemblyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller broke an API contract, e.g. mixed state representations.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A numerical kernel (eigensolver) failed.
class ComputationError : public std::runtime_error {
 public:
  ComputationError(const std::string& what, std::size_t dimension)
      : std::runtime_error(what + " (matrix dimension " + std::to_string(dimension) + ")"),
        dimension_(dimension) {}
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::size_t dimension_;
};

// A state lost too much norm when moved between representations.
class RepresentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// rho has weight where the reference state has no support.
class SupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Time integration broke a physical invariant (positivity, unitarity).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsotto
