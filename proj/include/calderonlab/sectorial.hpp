#pragma once

#include <functional>

#include "calderonlab/tolerances.hpp"
#include "calderonlab/types.hpp"

namespace calderonlab {

enum class Region { right, left, imaginary, right_or_imaginary, left_or_imaginary };

/// B = U T U^*, T upper triangular, with the selected eigenvalues leading.
struct OrderedSchur {
  MatrixXc U;
  MatrixXc T;
  Index selected = 0;
};

OrderedSchur ordered_schur(const MatrixXc& B, const std::function<bool(Complex)>& select);

/// Y with T11 Y - Y T22 = rhs for upper triangular T11, T22 with disjoint spectra.
MatrixXc triangular_sylvester(const MatrixXc& T11, const MatrixXc& T22, const MatrixXc& rhs);

/// exp(s * T) for upper triangular T (scaling and squaring on a Taylor core).
MatrixXc triangular_exp(const MatrixXc& T, double s);

/// Riesz projector onto the eigenvalues in `region`. Eigenvalues with
/// |Re| <= imag_tol count as imaginary; a right/left request with such an
/// eigenvalue present is rejected.
MatrixXc spectral_projection_oracle(const MatrixXc& B, Region region, double imag_tol);

/// Default imaginary-axis threshold imag_tol_rel * ||B||.
double imaginary_threshold(const MatrixXc& B, const Tolerances& tol);

/// Closed counter-clockwise boundary of {c < |lambda| < R, |arg lambda| < pi/2 - leg_angle}.
struct SectorialContour {
  double cut_radius = 0.0;
  double leg_angle = kPi / 6;
  double truncation_radius = 0.0;
  int n_quad = 512;
  int order = 16;        // Gauss-Legendre nodes per panel
  bool adaptive = true;  // split panels that come closer than twice their half length to an eigenvalue
};

/// Overrides taken from configuration; non-positive entries mean "derive".
struct ContourOverrides {
  double cut_radius = 0.0;
  double leg_angle = 0.0;
  double truncation_radius = 0.0;
  int n_quad = 0;
};

SectorialContour default_contour(const MatrixXc& B, const Tolerances& tol,
                                 const ContourOverrides& over = {});

/// Quadrature of (1/2 pi i) \oint lambda^{-1} (lambda - B)^{-1} B d lambda over the contour.
MatrixXc contour_projection(const MatrixXc& B, const SectorialContour& contour, int* nodes_used = nullptr);

struct SpectralSplit {
  MatrixXc P_plus;
  MatrixXc P_minus;
  MatrixXc P0_spectral;  // Riesz projector onto W0
  MatrixXc W0_basis;
  MatrixXc P0;           // orthogonal projection onto W0
  Index rank_plus = 0;
  Index rank_minus = 0;
  Index dim_W0 = 0;
  double oracle_mismatch = 0.0;
  double idem_residual = 0.0;
  double sum_residual = 0.0;
  double commutator_residual = 0.0;  // relative to ||B||
  int quadrature_nodes = 0;
  SectorialContour contour;
};

SpectralSplit sectorial_projection(const MatrixXc& B, const SectorialContour& contour, const Tolerances& tol);
SpectralSplit sectorial_projection(const MatrixXc& B, const Tolerances& tol);

enum class Family { plus, minus };

/// Q+(x) = exp(-xB) P+ for x >= 0 and Q-(x) = exp(-xB) P- for x <= 0, through
/// the ordered Schur form. With include_imaginary the W0 block joins the
/// requested family.
MatrixXc q_family(const MatrixXc& B, Family family, double x, double imag_tol, bool include_imaginary = false);

/// Precomputed ordered Schur data for repeated q_family evaluations.
class QFamily {
 public:
  QFamily(const MatrixXc& B, Family family, double imag_tol, bool include_imaginary);
  MatrixXc operator()(double x) const;
  const MatrixXc& projector() const { return P_; }

 private:
  Family family_;
  OrderedSchur schur_;
  MatrixXc Y_;
  MatrixXc P_;
};

struct ImaginaryData {
  MatrixXc W0_basis;
  MatrixXc P0;
  MatrixXc form;  // V^* (i J0) V
  int positive = 0;
  int negative = 0;
  int zero = 0;
  int signature = 0;
};

ImaginaryData imaginary_signature_data(const MatrixXc& B0, const MatrixXc& J0, double imag_tol);

}  // namespace calderonlab
