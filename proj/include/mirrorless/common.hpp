#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mirrorless {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Failure of a numerical procedure (integration, steady state, spectrum window).
/// The CLI maps this family to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario/config validation failure. The CLI maps this to exit code 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Execution policy for the scan kernels. Serial is the reference path.
enum class Execution { Serial, Parallel };

} // namespace mirrorless
