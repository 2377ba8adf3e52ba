#include "calderonlab/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace calderonlab {

CoefficientSeries::CoefficientSeries(Index rank, int P, int M_max) : rank_(rank), P_(P), M_(M_max) {
  if (rank < 1 || P < 0 || M_max < 0) throw_input("coefficient series needs rank >= 1, P >= 0, M_max >= 0");
  terms_.assign(P + 1, std::vector<MatrixXc>(2 * M_max + 1, MatrixXc::Zero(rank, rank)));
}

CoefficientSeries CoefficientSeries::constant(const MatrixXc& a) {
  CoefficientSeries s(a.rows(), 0, 0);
  s.term(0, 0) = a;
  return s;
}

MatrixXc CoefficientSeries::fourier(double x, int m) const {
  MatrixXc out = MatrixXc::Zero(rank_, rank_);
  if (std::abs(m) > M_) return out;
  double xp = 1.0;
  for (int p = 0; p <= P_; ++p) {
    out += xp * term(p, m);
    xp *= x;
  }
  return out;
}

MatrixXc CoefficientSeries::eval(double x, double theta) const {
  MatrixXc out = MatrixXc::Zero(rank_, rank_);
  for (int m = -M_; m <= M_; ++m) out += fourier(x, m) * std::polar(1.0, m * theta);
  return out;
}

MatrixXc CoefficientSeries::aliased(double x, int d, int N) const {
  MatrixXc out = MatrixXc::Zero(rank_, rank_);
  for (int m = -M_; m <= M_; ++m)
    if (((m - d) % N + N) % N == 0) out += fourier(x, m);
  return out;
}

std::vector<MatrixXc> CoefficientSeries::modal(double x, int N) const {
  std::vector<MatrixXc> out(N, MatrixXc::Zero(rank_, rank_));
  for (int m = -M_; m <= M_; ++m) out[((m % N) + N) % N] += fourier(x, m);
  return out;
}

CoefficientSeries CoefficientSeries::derivative_x() const {
  CoefficientSeries d(rank_, std::max(P_ - 1, 0), M_);
  for (int p = 1; p <= P_; ++p)
    for (int m = -M_; m <= M_; ++m) d.term(p - 1, m) = double(p) * term(p, m);
  return d;
}

CoefficientSeries CoefficientSeries::derivative_theta() const {
  CoefficientSeries d(rank_, P_, M_);
  for (int p = 0; p <= P_; ++p)
    for (int m = -M_; m <= M_; ++m) d.term(p, m) = (kI * double(m)) * term(p, m);
  return d;
}

CoefficientSeries CoefficientSeries::adjoint() const {
  CoefficientSeries a(rank_, P_, M_);
  for (int p = 0; p <= P_; ++p)
    for (int m = -M_; m <= M_; ++m) a.term(p, -m) = term(p, m).adjoint();
  return a;
}

namespace {
CoefficientSeries widen(const CoefficientSeries& s, int P, int M) {
  CoefficientSeries w(s.rank(), P, M);
  for (int p = 0; p <= s.P(); ++p)
    for (int m = -s.M_max(); m <= s.M_max(); ++m) w.term(p, m) = s.term(p, m);
  return w;
}
}  // namespace

CoefficientSeries CoefficientSeries::operator+(const CoefficientSeries& o) const {
  if (o.rank_ != rank_) throw_input("coefficient rank mismatch");
  CoefficientSeries a = widen(*this, std::max(P_, o.P_), std::max(M_, o.M_));
  for (int p = 0; p <= o.P_; ++p)
    for (int m = -o.M_; m <= o.M_; ++m) a.term(p, m) += o.term(p, m);
  return a;
}

CoefficientSeries CoefficientSeries::operator-(const CoefficientSeries& o) const {
  return *this + o * Complex(-1.0);
}

CoefficientSeries CoefficientSeries::operator*(const CoefficientSeries& o) const {
  if (o.rank_ != rank_) throw_input("coefficient rank mismatch");
  CoefficientSeries r(rank_, P_ + o.P_, M_ + o.M_);
  for (int p = 0; p <= P_; ++p)
    for (int m = -M_; m <= M_; ++m) {
      if (term(p, m).isZero(0.0)) continue;
      for (int q = 0; q <= o.P_; ++q)
        for (int n = -o.M_; n <= o.M_; ++n) r.term(p + q, m + n) += term(p, m) * o.term(q, n);
    }
  return r;
}

CoefficientSeries CoefficientSeries::operator*(Complex s) const {
  CoefficientSeries r = *this;
  for (auto& row : r.terms_)
    for (auto& t : row) t *= s;
  return r;
}

std::vector<int> CoefficientSeries::support() const {
  std::vector<int> out;
  for (int m = -M_; m <= M_; ++m) {
    bool nz = false;
    for (int p = 0; p <= P_; ++p) nz = nz || !term(p, m).isZero(0.0);
    if (nz) out.push_back(m);
  }
  return out;
}

bool CoefficientSeries::theta_constant() const {
  for (int m : support())
    if (m != 0) return false;
  return true;
}

bool CoefficientSeries::x_constant() const {
  for (int p = 1; p <= P_; ++p)
    for (int m = -M_; m <= M_; ++m)
      if (!term(p, m).isZero(0.0)) return false;
  return true;
}

bool CoefficientSeries::is_finite() const {
  for (const auto& row : terms_)
    for (const auto& t : row)
      if (!t.allFinite()) return false;
  return true;
}

double CoefficientSeries::max_abs() const {
  double v = 0.0;
  for (const auto& row : terms_)
    for (const auto& t : row) v = std::max(v, t.cwiseAbs().maxCoeff());
  return v;
}

bool CoefficientSeries::operator==(const CoefficientSeries& o) const {
  if (rank_ != o.rank_) return false;
  const CoefficientSeries d = *this - o;
  return d.max_abs() == 0.0;
}

}  // namespace calderonlab
