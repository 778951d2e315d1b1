#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nlsgi {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using CArray = Eigen::ArrayXcd;
using RArray = Eigen::ArrayXd;

inline constexpr Complex I{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Error categories map one-to-one onto the CLI exit codes:
// InputError -> 1, SolitonGateError -> 2, NumericalError -> 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolitonGateError : std::runtime_error {
  SolitonGateError(const std::string& what, double min_abs_a, double zero_count)
      : std::runtime_error(what), min_abs_a(min_abs_a), zero_count(zero_count) {}
  double min_abs_a;
  double zero_count;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataCorruptionError : NumericalError {
  using NumericalError::NumericalError;
};

struct StabilityError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace nlsgi
