#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace calderonlab {

using Complex = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  invalid_input,  ///< malformed configuration or violated precondition
  resolution,     ///< unresolved rank gap, under-resolved contour, ...
  inconsistent,   ///< a construction produced residuals far beyond tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_input(const std::string& what) {
  throw Error(ErrorKind::invalid_input, what);
}
[[noreturn]] inline void throw_resolution(const std::string& what) {
  throw Error(ErrorKind::resolution, what);
}
[[noreturn]] inline void throw_inconsistent(const std::string& what) {
  throw Error(ErrorKind::inconsistent, what);
}

}  // namespace calderonlab
