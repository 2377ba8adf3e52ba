#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "calderonlab/types.hpp"

namespace calderonlab {

using SparseXc = Eigen::SparseMatrix<Complex>;

struct GeometryConfig {
  double length = 1.0;
  int n_theta = 16;
  int n_x = 12;
  int rank = 1;

  void validate() const;
  bool operator==(const GeometryConfig&) const = default;
};

/// Chebyshev-Lobatto in x (ascending), equispaced Fourier in theta.
///
/// Nodal interior layout:  (theta_node * n_x + j) * k + c
/// Nodal boundary layout:  (theta_node * 2 + side) * k + c, side 0 is x = 0
/// The modal layouts are identical with the theta node replaced by an FFT
/// mode index; the unitary DFT maps one onto the other.
struct Discretization {
  GeometryConfig cfg;
  VectorXd x_nodes;
  VectorXd theta_nodes;
  VectorXd cheb_nodes;   // t_j = cos(pi j / (n_x - 1)), x_j = L (1 - t_j) / 2
  MatrixXd D_x;
  MatrixXc D_theta;      // nodal, n_theta x n_theta
  VectorXd w_x;          // Clenshaw-Curtis weights on [0, L]
  MatrixXd tau;          // first n_x - 1 Chebyshev coefficients from nodal values
  MatrixXc dft;          // unitary, modal = dft * nodal

  Index k() const { return cfg.rank; }
  int n_x() const { return cfg.n_x; }
  int n_theta() const { return cfg.n_theta; }
  Index interior_size() const { return Index(cfg.n_theta) * cfg.n_x * cfg.rank; }
  Index boundary_size() const { return Index(cfg.n_theta) * 2 * cfg.rank; }

  /// Signed Fourier mode of an FFT index.
  int mode_number(int idx) const { return idx < cfg.n_theta / 2 ? idx : idx - cfg.n_theta; }
  /// Symbol of -i d/dtheta on that index; zero on the Nyquist index.
  double symbol(int idx) const { return idx == cfg.n_theta / 2 ? 0.0 : mode_number(idx); }
  bool is_nyquist(int idx) const { return idx == cfg.n_theta / 2; }
  int index_of_mode(int n) const { return ((n % cfg.n_theta) + cfg.n_theta) % cfg.n_theta; }

  /// Diagonal of M_interior in either layout.
  VectorXd mass_interior() const;
  double mass_boundary() const { return 2 * kPi / cfg.n_theta; }
  /// (1 + n^2)^s per FFT index.
  VectorXd sobolev_weights(double s) const;

  /// Barycentric interpolation row evaluating a nodal x-profile at x.
  Eigen::RowVectorXd interpolation_row(double x) const;

  /// Unitary DFT on a stacked nodal vector with `blocks` entries per theta node.
  VectorXc to_modal(const VectorXc& nodal, Index blocks) const;
  VectorXc to_nodal(const VectorXc& modal, Index blocks) const;
};

Discretization build_discretization(const GeometryConfig& cfg);

/// Chebyshev differentiation on the Lobatto nodes cos(pi j / (n - 1)).
MatrixXd chebyshev_differentiation(int n);
VectorXd clenshaw_curtis_weights(int n);

/// Smooth cutoffs with phi(0) = 1 and support or numerical support in [0, delta).
double collar_width(double length);
double bump_cutoff(double x, double delta);
double gaussian_cutoff(double x, double delta);
double gaussian_cutoff_derivative(double x, double delta);

struct TraceSystem {
  SparseXc rho_0;      // interior -> circle at x = 0 (theta_node * k + c)
  SparseXc rho_L;
  SparseXc rho;        // interior -> boundary layout
  SparseXc rho_star;   // M_interior^{-1} rho^T M_boundary
  SparseXc extension_e;
  SparseXc r_plus;     // (f+, f-) -> f+
  SparseXc r_minus;
};

TraceSystem trace_and_dual(const Discretization& disc);

/// Discrete L^2_s norm of boundary data on one or more circles, stacked as
/// (theta_node * circles + circle) * k + c.
double sobolev_weighted_norm(const VectorXc& v, double s, const Discretization& disc);

}  // namespace calderonlab
