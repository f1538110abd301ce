#pragma once

#include <Eigen/Dense>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stabcert {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

/// Error raised when an operation is evaluated at (or too close to) a
/// spectral point, e.g. a resolvent at an eigenvalue.
class SingularPointError : public std::runtime_error {
 public:
  explicit SingularPointError(const std::string& what) : std::runtime_error(what) {}
};

/// Error raised when an input violates a documented precondition.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

inline std::string complex_to_string(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

}  // namespace stabcert
