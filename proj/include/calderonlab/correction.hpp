#pragma once

#include <vector>

#include "calderonlab/invertible_double.hpp"
#include "calderonlab/sectorial.hpp"

namespace calderonlab {

struct ModeProfile {
  int mode = 0;
  double value = 0.0;
};

struct CorrectionReport {
  double residual = 0.0;         // on modes |n| <= n_theta / 4
  int resolved_mode_limit = 0;
  std::vector<ModeProfile> profile;  // |(C+ - P+) restricted to mode n|
  double decay_slope = 0.0;      // least-squares slope of log profile on 4 <= |n| <= 16
  double expected_slope = 0.0;   // -L
  bool commutator_zeroth_order = false;
  double commutator_norm = 0.0;  // |[B0^t, J0^* T]|_0, max over sides and groups
  double condition = 0.0;        // of P+ + P-^*
  double sectorial_mismatch = 0.0;
  int quadrature_nodes = 0;
};

/// C+ against (P+ - rho+ A~^{-1} S)(P+ + P-^*)^{-1}, where P+ includes the
/// imaginary block and S is the remainder of a cut-off Q+/Q- extension.
CorrectionReport correction_formula_check(const DoubleOperator& dbl, const AssembledOperator& op,
                                          const CalderonBundle& bundle, const Tolerances& tol = {},
                                          const ContourOverrides& contour = {}, int threads = 1);

/// Least-squares slope of log(value) against |mode| on lo <= |mode| <= hi.
double log_linear_slope(const std::vector<ModeProfile>& profile, int lo, int hi);

}  // namespace calderonlab
