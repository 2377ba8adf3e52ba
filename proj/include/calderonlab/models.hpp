#pragma once

#include <functional>
#include <string>
#include <vector>

#include "calderonlab/operator.hpp"

namespace calderonlab {

/// A = d_x + i d_theta, scalar.
OperatorSpec cauchy_riemann_spec(double length, int n_theta, int n_x);
/// A = J (d_x - i sigma_1 d_theta) with J = [[0, 1], [-1, 0]]; formally self-adjoint.
OperatorSpec dirac_spec(double length, int n_theta, int n_x);
/// Block-diagonal operator A + A'. Both summands must use the same symbolic T.
OperatorSpec direct_sum(const OperatorSpec& a, const OperatorSpec& b);

MatrixXc pauli(int which);

enum class SweepParameter { J, beta1, beta0, C };
SweepParameter parse_sweep_parameter(const std::string& name);
std::string sweep_parameter_name(SweepParameter p);

/// s -> base with one coefficient moved along `direction`.
struct SpecFamily {
  OperatorSpec base;
  SweepParameter parameter = SweepParameter::C;
  CoefficientSeries direction;
  OperatorSpec operator()(double s) const;
};

/// CR plus s times a theta-constant zeroth-order multiplier.
SpecFamily zeroth_order_family(double length, int n_theta, int n_x);
/// CR plus s in beta0: the mode-0 eigenvalue of B0 crosses the imaginary axis at s = 0.
SpecFamily crossing_family(double length, int n_theta, int n_x);

/// Zeroth-order perturbations of CR used for the inner-index exploration.
std::vector<OperatorSpec> ucp_perturbation_suite(double length, int n_theta, int n_x);

}  // namespace calderonlab
