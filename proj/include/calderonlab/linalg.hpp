#pragma once

#include <Eigen/Dense>

#include "calderonlab/types.hpp"

namespace calderonlab {

/// Outcome of thresholding a singular-value sequence (sorted descending).
struct RankDecision {
  Index rank = 0;
  Index nullity = 0;       // columns minus rank
  double gap_ratio = 0.0;  // ratio of the two singular values bracketing the cut
  bool certified = false;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

/// Thresholds at rank_tol * sigma_max. When no singular value is cut the gap
/// is measured against the threshold itself.
RankDecision decide_rank(const VectorXd& singular_values, Index cols, double rank_tol,
                         double min_gap);

/// Orthonormal basis of the numerical nullspace.
MatrixXc null_space(const MatrixXc& a, double rank_tol, double min_gap,
                    RankDecision* decision = nullptr);

/// Orthonormal basis of the numerical range.
MatrixXc orthonormal_range(const MatrixXc& a, double rank_tol, double min_gap,
                           RankDecision* decision = nullptr);

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  using Plain = typename Derived::PlainObject;
  Eigen::JacobiSVD<Plain> svd(a.eval());
  return svd.singularValues()(0);
}

/// Largest principal angle between the column spans of two orthonormal
/// bases, computed from sines so small angles keep full relative accuracy.
/// Subspaces of different dimension are pi/2 apart.
template <typename DerivedA, typename DerivedB>
double max_principal_angle(const Eigen::MatrixBase<DerivedA>& qa,
                           const Eigen::MatrixBase<DerivedB>& qb) {
  if (qa.cols() != qb.cols()) return kPi / 2;
  if (qa.cols() == 0) return 0.0;
  const MatrixXc residual = qb - qa * (qa.adjoint() * qb);
  const double s = spectral_norm(residual);
  return std::asin(std::min(1.0, s));
}

/// Smallest principal angle between the spans (bases orthonormal).
template <typename DerivedA, typename DerivedB>
double min_principal_angle(const Eigen::MatrixBase<DerivedA>& qa,
                           const Eigen::MatrixBase<DerivedB>& qb) {
  if (qa.cols() == 0 || qb.cols() == 0) return kPi / 2;
  const MatrixXc cosines = qa.adjoint() * qb;
  const double c = spectral_norm(cosines);
  if (c < 0.9) return std::acos(std::min(1.0, c));
  // near-parallel directions: use sines of the residual for accuracy
  const MatrixXc residual = qb - qa * cosines;
  Eigen::JacobiSVD<MatrixXc> svd(residual);
  const auto& s = svd.singularValues();
  const Index m = std::min<Index>(qb.cols(), qa.rows() - qa.cols());
  if (m <= 0) return 0.0;
  return std::asin(std::min(1.0, s(std::min<Index>(m, s.size()) - 1)));
}

/// Hermitian square root of a Hermitian positive semidefinite matrix.
MatrixXc hermitian_sqrt(const MatrixXc& h);
MatrixXc hermitian_inverse_sqrt(const MatrixXc& h);

/// Unitary factor of the polar decomposition, J (J^* J)^{-1/2}.
MatrixXc unitary_part(const MatrixXc& j);

/// Signature counts of a Hermitian matrix with a relative zero threshold.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  int signature() const { return positive - negative; }
};
Inertia inertia(const MatrixXc& hermitian, double rel_tol);

}  // namespace calderonlab
