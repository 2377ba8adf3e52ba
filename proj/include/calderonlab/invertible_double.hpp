#pragma once

#include <vector>

#include "calderonlab/linalg.hpp"
#include "calderonlab/operator.hpp"

namespace calderonlab {

/// Tau form of the double on one mode group. Unknowns (f+, f-); rows
///   tau(A f+) = r+,  tau(-A^t f-) = r-,  rho f- - T rho f+ = s.
struct GroupDouble {
  MatrixXc matrix;
  MatrixXc U, V;
  VectorXd singular_values;
  RankDecision decision;
  MatrixXc kernel;    // orthonormal columns
  MatrixXc cokernel;

  /// Moore-Penrose application; zero on the numerical cokernel.
  MatrixXc solve(const MatrixXc& rhs) const;
};

struct DoubleOperator {
  std::vector<GroupDouble> groups;
  std::string T_used;
  bool positivity = true;  // hypothesis of the invertibility theorem
  Index kernel_dim = 0;
  Index cokernel_dim = 0;
  double min_gap_ratio = 0.0;
  double sigma_min = 0.0;  // smallest retained singular value over groups
  double sigma_max = 0.0;
  bool certified = true;
};

DoubleOperator assemble_double(const AssembledOperator& op, const Tolerances& tol = {}, int threads = 1);

struct GhostSpaces {
  std::vector<MatrixXc> basis_A;   // per group, interior columns
  std::vector<MatrixXc> basis_At;
  Index dim_A = 0;
  Index dim_At = 0;
  double gap_A = 0.0;   // smallest certifying gap ratio over groups
  double gap_At = 0.0;
};

/// Null spaces of [tau A; rho] and [tau A^t; rho]; throws "ghost dimension unresolved" without a clear gap.
GhostSpaces ghost_solutions(const AssembledOperator& op, const Tolerances& tol = {}, int threads = 1);

/// Largest principal angle between ker of the double and Z0(A) + Z0(A^t).
double kernel_ghost_angle(const DoubleOperator& dbl, const GhostSpaces& ghosts);

struct CalderonGroup {
  MatrixXc K_plus, K_minus;  // interior x boundary
  MatrixXc C_plus, C_minus;  // boundary x boundary
};

struct CalderonBundle {
  std::vector<CalderonGroup> groups;
  double idem_residual = 0.0;
  double compl_residual = 0.0;
  double sym_residual = 0.0;
  bool sym_applicable = false;  // J0^* T = Id, where C+ is expected orthogonal
  double kernel_residual = 0.0;
  double mode_coupling = 0.0;
};

/// Poisson operators and Calderon projections from boundary data xi: the
/// double is solved with transmission datum -T xi.
CalderonBundle calderon(const DoubleOperator& dbl, const AssembledOperator& op, const Tolerances& tol = {},
                        int threads = 1);

/// |<A~ f, g> - <f, A~ g>| / (|f| |g|) over smooth pairs satisfying the transmission condition.
double double_symmetry_defect(const AssembledOperator& op);

}  // namespace calderonlab
