#pragma once

// Shared scalar/matrix aliases, tolerance constants and error types used
// throughout the library.

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace entsim {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

constexpr Complex I_UNIT{0.0, 1.0};

namespace tol {

// Structural checks on states and maps (hermiticity, positivity floor,
// trace bounds, unitarity of wiring identities).
inline constexpr double structural = 1e-10;

// Agreement between the numerical evolution engine and closed-form results.
inline constexpr double engine = 1e-8;

// Exact algebraic identities evaluated in floating point.
inline constexpr double exact = 1e-12;

// Default relative tolerance for adaptive quadrature cross-checks.
inline constexpr double quadrature = 1e-9;

}  // namespace tol

// A conditioning event with (numerically) zero probability: the requested
// branch cannot be normalized.
struct NullEventError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure of an iterative numerical routine to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// True when |value - reference| is at most one unit in the second
// significant digit of the reference.  This is the comparator used for
// regression against externally reported two-significant-figure numbers:
// it accepts both round-to-nearest and truncation of the exact value.
inline bool within_two_sig_figs(double value, double reference) {
  if (reference == 0.0) return std::abs(value) < 1e-15;
  const double mag = std::floor(std::log10(std::abs(reference)));
  const double ulp2 = std::pow(10.0, mag - 1.0);
  return std::abs(value - reference) <= ulp2 * (1.0 + 1e-12);
}

}  // namespace entsim
