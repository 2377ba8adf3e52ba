#pragma once

#include <vector>

#include "calderonlab/types.hpp"

namespace calderonlab {

/// k x k matrix function sum_{p <= P, |m| <= M} a_{pm} x^p e^{i m theta}.
class CoefficientSeries {
 public:
  CoefficientSeries() = default;
  CoefficientSeries(Index rank, int P, int M_max);

  static CoefficientSeries constant(const MatrixXc& a);
  static CoefficientSeries zero(Index rank) { return CoefficientSeries(rank, 0, 0); }

  Index rank() const { return rank_; }
  int P() const { return P_; }
  int M_max() const { return M_; }

  MatrixXc& term(int p, int m) { return terms_[p][m + M_]; }
  const MatrixXc& term(int p, int m) const { return terms_[p][m + M_]; }

  MatrixXc eval(double x, double theta) const;
  /// sum_p a_{pm} x^p
  MatrixXc fourier(double x, int m) const;
  /// Discrete Fourier coefficient on an N-point grid: sum over m = d (mod N).
  MatrixXc aliased(double x, int d, int N) const;
  /// aliased() for d = 0 .. N-1.
  std::vector<MatrixXc> modal(double x, int N) const;

  CoefficientSeries derivative_x() const;
  CoefficientSeries derivative_theta() const;
  /// Pointwise conjugate transpose.
  CoefficientSeries adjoint() const;

  CoefficientSeries operator+(const CoefficientSeries& o) const;
  CoefficientSeries operator-(const CoefficientSeries& o) const;
  CoefficientSeries operator*(const CoefficientSeries& o) const;
  CoefficientSeries operator*(Complex s) const;

  /// Fourier indices m carrying a nonzero term.
  std::vector<int> support() const;
  bool theta_constant() const;
  bool x_constant() const;
  bool is_finite() const;
  double max_abs() const;

  bool operator==(const CoefficientSeries& o) const;

 private:
  Index rank_ = 0;
  int P_ = 0;
  int M_ = 0;
  std::vector<std::vector<MatrixXc>> terms_;
};

}  // namespace calderonlab
