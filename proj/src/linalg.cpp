#include "calderonlab/linalg.hpp"

#include <limits>

namespace calderonlab {

RankDecision decide_rank(const VectorXd& sv, Index cols, double rank_tol, double min_gap) {
  RankDecision d;
  if (sv.size() == 0) {
    d.nullity = cols;
    d.gap_ratio = std::numeric_limits<double>::infinity();
    d.certified = true;
    return d;
  }
  d.sigma_max = sv(0);
  d.sigma_min = sv(sv.size() - 1);
  const double threshold = rank_tol * d.sigma_max;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > threshold) ++rank;
  d.rank = rank;
  d.nullity = cols - rank;
  if (rank == 0) {
    d.gap_ratio = std::numeric_limits<double>::infinity();
  } else if (rank == sv.size()) {
    d.gap_ratio = threshold > 0 ? sv(rank - 1) / threshold
                                : std::numeric_limits<double>::infinity();
  } else {
    d.gap_ratio = sv(rank) > 0 ? sv(rank - 1) / sv(rank)
                               : std::numeric_limits<double>::infinity();
  }
  d.certified = d.gap_ratio >= min_gap;
  return d;
}

MatrixXc null_space(const MatrixXc& a, double rank_tol, double min_gap,
                    RankDecision* decision) {
  if (a.rows() == 0) {
    if (decision) *decision = decide_rank(VectorXd(), a.cols(), rank_tol, min_gap);
    return MatrixXc::Identity(a.cols(), a.cols());
  }
  Eigen::BDCSVD<MatrixXc> svd(a, Eigen::ComputeFullV);
  const RankDecision d = decide_rank(svd.singularValues(), a.cols(), rank_tol, min_gap);
  if (decision) *decision = d;
  return svd.matrixV().rightCols(d.nullity);
}

MatrixXc orthonormal_range(const MatrixXc& a, double rank_tol, double min_gap,
                           RankDecision* decision) {
  Eigen::BDCSVD<MatrixXc> svd(a, Eigen::ComputeThinU);
  const RankDecision d = decide_rank(svd.singularValues(), a.cols(), rank_tol, min_gap);
  if (decision) *decision = d;
  return svd.matrixU().leftCols(d.rank);
}

MatrixXc hermitian_sqrt(const MatrixXc& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (h + h.adjoint()));
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXc hermitian_inverse_sqrt(const MatrixXc& h) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (h + h.adjoint()));
  if (es.eigenvalues().minCoeff() <= 0.0) throw_input("inverse square root of a non-positive matrix");
  const VectorXd lam = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXc unitary_part(const MatrixXc& j) {
  return j * hermitian_inverse_sqrt(j.adjoint() * j);
}

Inertia inertia(const MatrixXc& hermitian, double rel_tol) {
  Inertia out;
  if (hermitian.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (hermitian + hermitian.adjoint()),
                                              Eigen::EigenvaluesOnly);
  const VectorXd& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  for (Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) <= rel_tol * scale) ++out.zero;
    else if (lam(i) > 0) ++out.positive;
    else ++out.negative;
  }
  return out;
}

}  // namespace calderonlab
