#pragma once

#include <vector>

#include "calderonlab/invertible_double.hpp"

namespace calderonlab {

/// u' = -G_n(x) u for one Fourier mode, G_n = i n beta1 + beta0 + J^{-1} C.
struct ModeSystem {
  int index = 0;  // DFT slot
  int mode = 0;
  bool constant = true;
  MatrixXc Phi;   // fundamental solution at x = L
};

struct OracleCauchySpace {
  int n_theta = 0;
  Index k = 0;
  double length = 0.0;
  std::vector<ModeSystem> systems;  // every non-Nyquist slot, in DFT order
  std::vector<MatrixXc> basis;      // 2k x k orthonormal, rows (x=0, x=L)
  std::vector<MatrixXc> projection; // orthogonal projection onto basis

  const ModeSystem* find(int index) const;
};

MatrixXc mode_generator(const OperatorSpec& spec, int mode, double x);

/// Phi_n(x_end); matrix exponential for x-constant coefficients, RKF78 otherwise.
MatrixXc fundamental_solution(const OperatorSpec& spec, int mode, double x_end, double ode_tol, bool force_ode = false);

OracleCauchySpace mode_oracle_cauchy(const OperatorSpec& spec, const Discretization& disc,
                                     double ode_tol = 1e-12, int threads = 1);

struct OracleModeAngle {
  int mode = 0;
  double angle = 0.0;      // im C+ block vs oracle span
  double aps_angle = 0.0;  // oracle span vs im P+(B0) at both ends
};

struct OracleComparison {
  std::vector<OracleModeAngle> modes;
  int mode_limit = 0;
  double global_distance = 0.0;  // max angle over |n| <= mode_limit
  double mode_coupling = 0.0;
  double aps_slope = 0.0;        // on 4 <= |n| <= 16
  double expected_slope = 0.0;
};

OracleComparison compare_to_oracle(const CalderonBundle& bundle, const AssembledOperator& op,
                                   const OracleCauchySpace& oracle, int mode_limit, const Tolerances& tol = {});

/// Oracle against itself, for plumbing checks.
double oracle_distance(const OracleCauchySpace& a, const OracleCauchySpace& b);

struct ConstantUcpVerdict {
  std::vector<double> x_samples;
  std::vector<int> d;                  // 0 whenever every Phi_n(x) is invertible
  std::vector<double> min_sigma;       // smallest singular value of Phi_n(x_j) over modes
  bool d_zero = true;
  std::string verdict;
};

ConstantUcpVerdict constant_coeff_ucp(const OperatorSpec& spec, const Discretization& disc,
                                      const std::vector<double>& x_samples);

}  // namespace calderonlab
