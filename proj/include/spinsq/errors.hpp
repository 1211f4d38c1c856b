#pragma once

#include <stdexcept>
#include <string>

namespace spinsq {

// Invalid arguments or out-of-domain parameters (bad n_R index, non-finite
// angle, geometry with d <= 2r, ...). Maps to the usage exit code in the CLI.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical contract was violated at runtime: lost normalization, quadrature
// that failed to converge, a non-unimodal optimizer bracket, a degenerate mean
// spin where a mean-spin frame is required, or an uninformative readout slope.
// Maps to a distinct exit code in the CLI.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinsq
