#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fhcs {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector length is not a power of two, or two operands disagree on n.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Level, frequency or coefficient index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter value (epsilon, budgets, sparsity pattern, config field).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Requested work exceeds a configured limit (dense matrix size, enumeration cap).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

constexpr bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

/// log2 of a power of two.
constexpr int ilog2(std::size_t n) noexcept {
  int r = 0;
  while ((std::size_t{1} << r) < n) ++r;
  return r;
}

}  // namespace fhcs
