#pragma once

#include <string>
#include <vector>

#include "calderonlab/invertible_double.hpp"
#include "calderonlab/models.hpp"

namespace calderonlab {

/// Traces of the interior null space of tau(A), per group, orthonormal.
struct CauchySpace {
  std::vector<MatrixXc> basis;
  Index dimension = 0;
  Index boundary_dimension = 0;
  double min_gap_ratio = 0.0;
  bool certified = true;
};

CauchySpace cauchy_space_direct(const AssembledOperator& op, const Tolerances& tol = {}, int threads = 1);

struct ProjectionInvariants {
  double idem_residual = 0.0;
  double compl_residual = 0.0;
  double sym_residual = 0.0;
  bool sym_applicable = false;
  double kernel_residual = 0.0;
  double mode_coupling = 0.0;
  double direct_angle = 0.0;  // im C+ against cauchy_space_direct
  Index rank_plus = 0;
  Index rank_minus = 0;
};

ProjectionInvariants projection_invariants(const CalderonBundle& bundle, const AssembledOperator& op,
                                           const CauchySpace& direct, const Tolerances& tol = {});

/// omega(u, v) = <-J0 u, v> on boundary data of one group; v^* W u with W = -m J0.
struct SymplecticForm {
  std::vector<MatrixXc> W;
  double antisymmetry_defect = 0.0;
  double min_sigma = 0.0;
};

SymplecticForm symplectic_form(const AssembledOperator& op);

struct CobordismReport {
  double isotropy_residual = 0.0;
  double isotropy_residual_minus = 0.0;
  double transversality_angle = 0.0;
  Index dim_plus = 0;
  Index dim_minus = 0;
  Index boundary_dimension = 0;
  bool T_unitary_part = false;
  int signature = 0;  // of i P0 J0 on W0, both sides
  std::array<int, 2> side_signature{0, 0};
  Index dim_W0 = 0;
  bool graded = false;  // B0 hermitian and odd under alpha
  double grading_defect = 0.0;  // max(|alpha^2 - I|, |alpha B0 + B0 alpha|)
  int index_B_plus = 0;
  bool lagrangian = false;
};

CobordismReport lagrangian_and_cobordism(const AssembledOperator& op, const CalderonBundle& bundle,
                                         const Tolerances& tol = {});

struct UcpSample {
  double x = 0.0;
  Index d = 0;
  Index d_adjoint = 0;
  double gap = 0.0;
  double gap_adjoint = 0.0;
  bool conclusive = true;
};

struct UcpProfile {
  std::vector<UcpSample> samples;
  int inner_index = 0;
  bool monotone = true;
  bool conclusive = true;
};

/// Ranks of [tau(A); trace on Sigma(x)] with Sigma(x) the circles at x and L - x.
UcpProfile ucp_defect_profile(const AssembledOperator& op, const std::vector<double>& x_samples,
                              const Tolerances& tol = {}, int threads = 1);

struct MetricReport {
  double N0 = 0.0;
  double N1 = 0.0;
  double d0 = 0.0;
  double d_str = 0.0;
};

MetricReport operator_metrics(const OperatorSpec& a, const OperatorSpec& b, int threads = 1);
MetricReport operator_metrics(const AssembledOperator& a, const AssembledOperator& b);

struct SweepPoint {
  double s = 0.0;
  double dC = 0.0;         // |C+(s) - C+(s0)| in L^2_sobolev
  double C_norm = 0.0;
  double d0 = 0.0;         // to s0
  double d_str = 0.0;
  double step_dC = 0.0;    // to the previous point
  double step_dP = 0.0;    // |P+(B0)(s) - P+(B0)(previous)|
  double step_d0 = 0.0;
  double step_d_str = 0.0;
  double step_ratio = 0.0;      // step_dC / step_d_str
  double step_resolvent = 0.0;  // |inverse double difference|
  double resolvent_ratio = 0.0; // step_resolvent / step_d0
  bool jump_C = false;
  bool jump_P = false;
  double compl_residual = 0.0;
};

struct SweepReport {
  std::string parameter;
  double sobolev_s = 0.0;
  std::vector<SweepPoint> points;
  bool jump = false;
  std::vector<int> jump_steps;  // index of the later point of each flagged step
  double max_step_ratio = 0.0;
  double resolvent_ratio_min = 0.0;
  double resolvent_ratio_max = 0.0;
  bool resolvent_stable = false;
  double max_C_norm = 0.0;
};

/// Jump flags: step > 10 x median of up to four neighbouring steps and above floor.
std::vector<bool> jump_flags(const std::vector<double>& steps, double floor);

SweepReport continuity_sweep(const SpecFamily& family, const std::vector<double>& s_grid, double sobolev_s,
                             const Tolerances& tol = {}, int threads = 1);

}  // namespace calderonlab
