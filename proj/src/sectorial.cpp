#include "calderonlab/sectorial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "calderonlab/linalg.hpp"

namespace calderonlab {

namespace {

std::string format_complex(Complex z) {
  std::ostringstream s;
  s.precision(6);
  s << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return s.str();
}

// Swap the adjacent diagonal entries p, p+1 of the triangular factor.
void swap_adjacent(MatrixXc& T, MatrixXc& U, Index p) {
  const Complex a = T(p, p), b = T(p, p + 1), c = T(p + 1, p + 1);
  Eigen::JacobiRotation<Complex> G;
  G.makeGivens(b, c - a);
  T.applyOnTheLeft(p, p + 1, G.adjoint());
  T.applyOnTheRight(p, p + 1, G);
  U.applyOnTheRight(p, p + 1, G);
  T(p + 1, p) = 0.0;
}

MatrixXc riesz_from_schur(const OrderedSchur& s) {
  const Index n = s.T.rows(), m = s.selected;
  MatrixXc P = MatrixXc::Zero(n, n);
  if (m == 0) return P;
  if (m == n) return MatrixXc::Identity(n, n);
  const MatrixXc Y = triangular_sylvester(s.T.topLeftCorner(m, m), s.T.bottomRightCorner(n - m, n - m),
                                          s.T.topRightCorner(m, n - m));
  MatrixXc core = MatrixXc::Zero(n, n);
  core.topLeftCorner(m, m).setIdentity();
  core.topRightCorner(m, n - m) = Y;
  return s.U * core * s.U.adjoint();
}

std::function<bool(Complex)> region_predicate(Region region, double thr) {
  switch (region) {
    case Region::right: return [thr](Complex z) { return z.real() > thr; };
    case Region::left: return [thr](Complex z) { return z.real() < -thr; };
    case Region::imaginary: return [thr](Complex z) { return std::abs(z.real()) <= thr; };
    case Region::right_or_imaginary: return [thr](Complex z) { return z.real() >= -thr; };
    case Region::left_or_imaginary: return [thr](Complex z) { return z.real() <= thr; };
  }
  return {};
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
void gauss_legendre(int n, VectorXd& nodes, VectorXd& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes(i) = x;
    weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct Segment {
  double u0, u1;
  std::function<Complex(double)> z;
  std::function<Complex(double)> dz;
  double speed;  // |dz|, constant on each piece
};

std::vector<Segment> contour_segments(const SectorialContour& c) {
  const double psi = kPi / 2 - c.leg_angle, r = c.cut_radius, R = c.truncation_radius;
  const Complex lo = std::polar(1.0, -psi), hi = std::polar(1.0, psi);
  std::vector<Segment> s;
  s.push_back({r, R, [lo](double u) { return u * lo; }, [lo](double) { return lo; }, 1.0});
  s.push_back({-psi, psi, [R](double u) { return std::polar(R, u); },
               [R](double u) { return kI * std::polar(R, u); }, R});
  s.push_back({r, R, [hi, r, R](double u) { return (R + r - u) * hi; }, [hi](double) { return -hi; }, 1.0});
  s.push_back({-psi, psi, [r](double u) { return std::polar(r, -u); },
               [r](double u) { return -kI * std::polar(r, -u); }, r});
  return s;
}

}  // namespace

OrderedSchur ordered_schur(const MatrixXc& B, const std::function<bool(Complex)>& select) {
  OrderedSchur out;
  const Index n = B.rows();
  if (n == 0) return out;
  Eigen::ComplexSchur<MatrixXc> schur(B);
  out.T = schur.matrixT();
  out.U = schur.matrixU();
  out.T.triangularView<Eigen::StrictlyLower>().setZero();
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    if (!select(out.T(i, i))) continue;
    for (Index p = i; p > next; --p) swap_adjacent(out.T, out.U, p - 1);
    ++next;
  }
  out.selected = next;
  return out;
}

MatrixXc triangular_sylvester(const MatrixXc& T11, const MatrixXc& T22, const MatrixXc& rhs) {
  const Index m = T11.rows(), n = T22.rows();
  MatrixXc Y(m, n);
  for (Index j = 0; j < n; ++j) {
    VectorXc r = rhs.col(j);
    for (Index l = 0; l < j; ++l) r += Y.col(l) * T22(l, j);
    MatrixXc shifted = T11;
    shifted.diagonal().array() -= T22(j, j);
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(r);
  }
  return Y;
}

MatrixXc triangular_exp(const MatrixXc& T, double s) {
  const Index n = T.rows();
  if (n == 0) return MatrixXc(0, 0);
  MatrixXc A = s * T;
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  A /= std::ldexp(1.0, squarings);
  MatrixXc E = MatrixXc::Identity(n, n);
  MatrixXc term = MatrixXc::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = (term * A) / double(k);
    E += term;
  }
  for (int q = 0; q < squarings; ++q) E = E * E;
  E.triangularView<Eigen::StrictlyLower>().setZero();
  return E;
}

double imaginary_threshold(const MatrixXc& B, const Tolerances& tol) {
  return tol.imag_tol_rel * spectral_norm(B);
}

MatrixXc spectral_projection_oracle(const MatrixXc& B, Region region, double imag_tol) {
  if (region == Region::right || region == Region::left) {
    Eigen::ComplexEigenSolver<MatrixXc> es(B, false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex z = es.eigenvalues()(i);
      if (std::abs(z.real()) <= imag_tol)
        throw_resolution("eigenvalue " + format_complex(z) + " lies on the dividing line");
    }
  }
  return riesz_from_schur(ordered_schur(B, region_predicate(region, imag_tol)));
}

SectorialContour default_contour(const MatrixXc& B, const Tolerances& tol, const ContourOverrides& over) {
  SectorialContour c;
  const double thr = imaginary_threshold(B, tol);
  Eigen::ComplexEigenSolver<MatrixXc> es(B, false);
  const auto& ev = es.eigenvalues();
  double min_re = std::numeric_limits<double>::infinity();
  double min_imag_mod = std::numeric_limits<double>::infinity();
  double radius = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) {
    const Complex z = ev(i);
    radius = std::max(radius, std::abs(z));
    if (std::abs(z.real()) > thr) {
      min_re = std::min(min_re, std::abs(z.real()));
      const double margin = kPi / 2 - std::abs(std::arg(z.real() > 0 ? z : -z));
      min_margin = std::min(min_margin, margin);
    } else if (std::abs(z) > thr) {
      min_imag_mod = std::min(min_imag_mod, std::abs(z));
    }
  }
  double cut = std::isfinite(min_re) ? 0.5 * min_re : 0.5 * std::max(1.0, radius);
  if (std::isfinite(min_imag_mod)) cut = std::min(cut, 0.5 * min_imag_mod);
  c.cut_radius = over.cut_radius > 0 ? over.cut_radius : cut;
  const double angle = std::isfinite(min_margin) ? std::min(kPi / 6, 0.5 * min_margin) : kPi / 6;
  c.leg_angle = over.leg_angle > 0 ? over.leg_angle : angle;
  c.truncation_radius = over.truncation_radius > 0 ? over.truncation_radius
                                                   : std::max(4.0 * radius, 4.0 * c.cut_radius);
  if (over.n_quad > 0) c.n_quad = over.n_quad;
  if (!(c.leg_angle > 0 && c.leg_angle < kPi / 2)) throw_input("contour leg_angle must lie in (0, pi/2)");
  if (!(c.truncation_radius > c.cut_radius)) throw_input("contour truncation radius must exceed the cut radius");
  if (c.truncation_radius <= radius) throw_input("contour truncation radius must exceed the spectral radius");
  return c;
}

MatrixXc contour_projection(const MatrixXc& B, const SectorialContour& contour, int* nodes_used) {
  const Index n = B.rows();
  MatrixXc P = MatrixXc::Zero(n, n);
  if (n == 0) return P;
  Eigen::ComplexEigenSolver<MatrixXc> es(B, false);
  const VectorXc ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());

  VectorXd gx, gw;
  gauss_legendre(contour.order, gx, gw);
  const auto segments = contour_segments(contour);
  double total_len = 0.0;
  for (const auto& s : segments) total_len += (s.u1 - s.u0) * s.speed;
  const int panels_total = std::max<int>(4, contour.n_quad / contour.order);

  auto distance = [&](const Segment& s, double a, double b) {
    double d = std::numeric_limits<double>::infinity();
    for (int q = 0; q <= 8; ++q) {
      const Complex z = s.z(a + (b - a) * q / 8.0);
      for (Index i = 0; i < ev.size(); ++i) d = std::min(d, std::abs(z - ev(i)));
    }
    return d;
  };

  int nodes = 0;
  Eigen::PartialPivLU<MatrixXc> lu;
  std::function<void(const Segment&, double, double, int)> panel = [&](const Segment& s, double a, double b,
                                                                       int depth) {
    const double half = 0.5 * (b - a) * s.speed;
    const double d = distance(s, a, b);
    if (d < 1e-14 * scale) throw_resolution("eigenvalue on contour");
    if (contour.adaptive && half > 0.5 * d && depth < 60) {
      const double m = 0.5 * (a + b);
      panel(s, a, m, depth + 1);
      panel(s, m, b, depth + 1);
      return;
    }
    for (int q = 0; q < contour.order; ++q) {
      const double u = 0.5 * (a + b) + 0.5 * (b - a) * gx(q);
      const Complex z = s.z(u);
      MatrixXc shifted = -B;
      shifted.diagonal().array() += z;
      lu.compute(shifted);
      const Complex w = 0.5 * (b - a) * gw(q) * s.dz(u) / z;
      P += w * lu.solve(B);
      ++nodes;
    }
  };
  for (const auto& s : segments) {
    const double len = (s.u1 - s.u0) * s.speed;
    const int np = std::max(1, static_cast<int>(std::lround(panels_total * len / total_len)));
    for (int p = 0; p < np; ++p) {
      const double a = s.u0 + (s.u1 - s.u0) * p / np, b = s.u0 + (s.u1 - s.u0) * (p + 1) / np;
      panel(s, a, b, 0);
    }
  }
  if (nodes_used) *nodes_used = nodes;
  return P / (2.0 * kPi * kI);
}

SpectralSplit sectorial_projection(const MatrixXc& B, const SectorialContour& contour, const Tolerances& tol) {
  SpectralSplit out;
  const Index n = B.rows();
  out.contour = contour;
  const double thr = imaginary_threshold(B, tol);
  int n1 = 0, n2 = 0;
  out.P_plus = contour_projection(B, contour, &n1);
  out.P_minus = contour_projection(-B, contour, &n2);
  out.quadrature_nodes = n1 + n2;

  const MatrixXc plus_oracle = riesz_from_schur(ordered_schur(B, region_predicate(Region::right, thr)));
  const MatrixXc minus_oracle = riesz_from_schur(ordered_schur(B, region_predicate(Region::left, thr)));
  const OrderedSchur imag = ordered_schur(B, region_predicate(Region::imaginary, thr));
  out.P0_spectral = riesz_from_schur(imag);
  out.dim_W0 = imag.selected;
  out.W0_basis = imag.selected > 0 ? MatrixXc(imag.U.leftCols(imag.selected)) : MatrixXc(n, 0);
  out.P0 = out.W0_basis * out.W0_basis.adjoint();
  out.oracle_mismatch = std::max(spectral_norm(out.P_plus - plus_oracle), spectral_norm(out.P_minus - minus_oracle));
  if (out.oracle_mismatch > 100 * tol.quad_tol) {
    std::ostringstream msg;
    msg << "contour under-resolved: quadrature differs from the Schur projector by " << out.oracle_mismatch;
    throw_resolution(msg.str());
  }
  Eigen::ComplexEigenSolver<MatrixXc> es(B, false);
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re > thr) ++out.rank_plus;
    else if (re < -thr) ++out.rank_minus;
  }
  out.idem_residual = spectral_norm(out.P_plus * out.P_plus - out.P_plus);
  out.sum_residual = spectral_norm(out.P_plus + out.P_minus + out.P0_spectral - MatrixXc::Identity(n, n));
  const double bn = spectral_norm(B);
  out.commutator_residual = bn > 0 ? spectral_norm(out.P_plus * B - B * out.P_plus) / bn : 0.0;
  return out;
}

SpectralSplit sectorial_projection(const MatrixXc& B, const Tolerances& tol) {
  return sectorial_projection(B, default_contour(B, tol), tol);
}

QFamily::QFamily(const MatrixXc& B, Family family, double imag_tol, bool include_imaginary)
    : family_(family) {
  Region region;
  if (family == Family::plus) region = include_imaginary ? Region::right_or_imaginary : Region::right;
  else region = include_imaginary ? Region::left_or_imaginary : Region::left;
  schur_ = ordered_schur(B, region_predicate(region, imag_tol));
  const Index n = B.rows(), m = schur_.selected;
  if (m > 0 && m < n)
    Y_ = triangular_sylvester(schur_.T.topLeftCorner(m, m), schur_.T.bottomRightCorner(n - m, n - m),
                              schur_.T.topRightCorner(m, n - m));
  P_ = riesz_from_schur(schur_);
}

MatrixXc QFamily::operator()(double x) const {
  if ((family_ == Family::plus && x < 0) || (family_ == Family::minus && x > 0))
    throw_input("q_family: sign of x does not match the requested family");
  const Index n = schur_.T.rows(), m = schur_.selected;
  MatrixXc core = MatrixXc::Zero(n, n);
  if (m == 0) return core;
  const MatrixXc E = triangular_exp(schur_.T.topLeftCorner(m, m), -x);
  core.topLeftCorner(m, m) = E;
  if (m < n) core.topRightCorner(m, n - m) = E * Y_;
  return schur_.U * core * schur_.U.adjoint();
}

MatrixXc q_family(const MatrixXc& B, Family family, double x, double imag_tol, bool include_imaginary) {
  return QFamily(B, family, imag_tol, include_imaginary)(x);
}

ImaginaryData imaginary_signature_data(const MatrixXc& B0, const MatrixXc& J0, double imag_tol) {
  const double jn = spectral_norm(J0);
  if (spectral_norm(J0 + J0.adjoint()) > 1e-10 * std::max(jn, 1e-300))
    throw_input("signature undefined: J0 not skew-adjoint");
  ImaginaryData out;
  const OrderedSchur s = ordered_schur(B0, region_predicate(Region::imaginary, imag_tol));
  out.W0_basis = s.selected > 0 ? MatrixXc(s.U.leftCols(s.selected)) : MatrixXc(B0.rows(), 0);
  out.P0 = out.W0_basis * out.W0_basis.adjoint();
  MatrixXc form = out.W0_basis.adjoint() * (kI * J0) * out.W0_basis;
  out.form = 0.5 * (form + form.adjoint());
  const Inertia in = inertia(out.form, 1e-10);
  out.positive = in.positive;
  out.negative = in.negative;
  out.zero = in.zero;
  out.signature = in.signature();
  return out;
}

}  // namespace calderonlab
