#pragma once

#include <array>
#include <string>
#include <vector>

#include "calderonlab/coefficients.hpp"
#include "calderonlab/geometry.hpp"
#include "calderonlab/tolerances.hpp"

namespace calderonlab {

enum class MorphismKind { inverse_J_adjoint, J_unitary_part, explicit_matrix };

struct BoundaryMorphism {
  MorphismKind kind = MorphismKind::inverse_J_adjoint;
  /// theta-only series per side (x = 0, x = L) for explicit_matrix
  std::array<CoefficientSeries, 2> explicit_T;
  std::string name() const;
};

/// A = J (d_x + beta1 d_theta + beta0) + C on [0, L] x S^1.
struct OperatorSpec {
  std::string name;
  GeometryConfig geometry;
  CoefficientSeries J, beta1, beta0, C;
  BoundaryMorphism T;

  void validate() const;
  CoefficientSeries E1() const { return J * beta1; }
  CoefficientSeries E0() const { return J * beta0 + C; }
  bool theta_constant() const;
  bool x_constant() const;
  /// Fourier indices that couple modes.
  std::vector<int> shifts() const;
};

/// Cosets of the subgroup of Z_N generated by the coefficient shifts.
struct ModeGroups {
  int n_theta = 0;
  int stride = 0;
  std::vector<std::vector<int>> members;  // FFT indices, ascending
  std::vector<int> group_of;
  std::vector<int> local_of;
  Index count() const { return static_cast<Index>(members.size()); }
};

ModeGroups make_mode_groups(int n_theta, const std::vector<int>& shifts);

/// Block (t, s) = hat[(idx_t - idx_s) mod N] for a theta multiplier.
MatrixXc group_multiplier(const std::vector<MatrixXc>& hat, const std::vector<int>& members);
/// Discrete Fourier coefficients of nodal multiplier samples.
std::vector<MatrixXc> modal_from_nodal(const std::vector<MatrixXc>& nodal);
/// Boundary layout (t * 2 + side) * k + c from per-side blocks.
MatrixXc boundary_blockdiag(const MatrixXc& side0, const MatrixXc& sideL, Index k);
MatrixXc side_block(const MatrixXc& boundary, int side_row, int side_col, Index k);
/// Rows selecting one side of a boundary group vector.
MatrixXc side_selector(int side, Index group_size, Index k);

/// Collar tuple at one boundary circle, in the inward coordinate x'.
struct SideCollar {
  double x = 0.0;
  int orient = 1;                       // d/dx = orient * d/dx'
  std::vector<MatrixXc> J0_nodal;       // per theta node
  std::vector<MatrixXc> T_nodal;
  std::vector<MatrixXc> beta1_nodal;    // principal part of B0 is orient * beta1 * i zeta
};

/// Modal group matrices at one side; sizes gs * k.
struct GroupSide {
  MatrixXc J0, T, B0, B0_t, C0, C0_tilde, C1, C1_tilde, dJ;
};

struct GroupOperator {
  std::vector<int> modes;
  MatrixXc A, At;          // collocation, interior x interior
  MatrixXc A_tau, At_tau;  // tau rows
  MatrixXc rho;            // interior -> boundary group layout
  MatrixXc tau_rows;       // interior -> tau coefficient rows
  std::array<GroupSide, 2> side;
  MatrixXc T;              // boundary blockdiag
  MatrixXc J0;             // boundary blockdiag, inward
  MatrixXc B0;             // boundary blockdiag
  VectorXd mass;           // interior mass diagonal
};

struct AssembledOperator {
  OperatorSpec spec;
  Discretization disc;
  ModeGroups groups;
  std::vector<GroupOperator> blocks;
  std::array<SideCollar, 2> collar;
  double J_condition_max = 0.0;
  double ellipticity_margin = 0.0;
  double green_defect_bound = -1.0;
  bool formally_self_adjoint = false;
  double self_adjoint_defect = 0.0;

  Index k() const { return disc.k(); }
  int n_x() const { return disc.n_x(); }
  Index group_size(Index g) const { return static_cast<Index>(groups.members[g].size()); }
};

struct AssemblyOptions {
  int threads = 1;
  std::vector<int> extra_shifts;  // joins group structures when comparing operators
};

AssembledOperator assemble_operator(const OperatorSpec& spec, const Discretization& disc,
                                    const AssemblyOptions& opts = {});

struct SlWitness {
  int side = 0;
  double theta = 0.0;
  int zeta = 1;
  double sigma_min = 0.0;
};

struct SlReport {
  bool positivity = true;
  bool sl_pass = true;
  double min_positivity_eigenvalue = 0.0;
  double min_sl_sigma = 0.0;
  std::vector<SlWitness> witnesses;
};

struct SlMap {
  double sigma_min = 0.0;
  Complex determinant = 0.0;
  bool square = true;
};

/// (e+, e-) -> -J0^* T e+ + e- on im P+(b0) + im P-(b0^*).
SlMap sl_map(const MatrixXc& J0, const MatrixXc& b0, const MatrixXc& T, double imag_tol_rel = 1e-9);

SlReport check_ellipticity_and_sl(const AssembledOperator& op, const Tolerances& tol = {});

/// |(A s, s') - (s, A^t s') + sum_sides <J0 rho s, rho s'>| for modal interior vectors of one group.
double green_pairing_defect(const AssembledOperator& op, Index group, const VectorXc& s, const VectorXc& sp);

/// Green defect over a fixed set of smooth random test sections.
double green_defect(AssembledOperator& op);

/// Modal samples of a smooth test section sum_q a_q exp(kappa_q x) e^{i m_q theta} v_q.
struct TestSection {
  std::vector<Complex> amplitude;
  std::vector<double> kappa;
  std::vector<int> mode;
  std::vector<VectorXc> fiber;
};
std::vector<TestSection> green_test_sections(Index k, int count);
/// Group-local modal samples of a test section; zero outside the group's modes.
VectorXc sample_section(const TestSection& s, const AssembledOperator& op, Index group);

}  // namespace calderonlab
