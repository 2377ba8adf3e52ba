#include "calderonlab/geometry.hpp"

#include <cmath>
#include <sstream>

namespace calderonlab {

void GeometryConfig::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw_input("geometry.length must be positive");
  if (n_theta % 2 != 0) throw_input("n_theta must be even");
  if (n_theta < 8) throw_input("n_theta must be at least 8");
  if (n_x < 8) throw_input("n_x must be at least 8");
  if (rank < 1) throw_input("rank must be at least 1");
}

MatrixXd chebyshev_differentiation(int n) {
  const int N = n - 1;
  MatrixXd D = MatrixXd::Zero(n, n);
  auto c = [&](int j) { return (j == 0 || j == N ? 2.0 : 1.0) * (j % 2 ? -1.0 : 1.0); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // t_i - t_j via the product formula, exact to roundoff near the ends
      const double diff = 2.0 * std::sin(kPi * (i + j) / (2.0 * N)) * std::sin(kPi * (j - i) / (2.0 * N));
      D(i, j) = c(i) / (c(j) * diff);
    }
  }
  for (int i = 0; i < n; ++i) D(i, i) = -D.row(i).sum();
  return D;
}

VectorXd clenshaw_curtis_weights(int n) {
  const int N = n - 1;
  VectorXd w = VectorXd::Zero(n);
  VectorXd v = VectorXd::Ones(std::max(N - 1, 0));
  auto theta = [&](int j) { return kPi * j / N; };
  if (N % 2 == 0) {
    w(0) = w(N) = 1.0 / (double(N) * N - 1.0);
    for (int q = 1; q < N / 2; ++q)
      for (int i = 1; i < N; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * q * theta(i)) / (4.0 * q * q - 1.0);
    for (int i = 1; i < N; ++i) v(i - 1) -= std::cos(N * theta(i)) / (double(N) * N - 1.0);
  } else {
    w(0) = w(N) = 1.0 / (double(N) * N);
    for (int q = 1; q <= (N - 1) / 2; ++q)
      for (int i = 1; i < N; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * q * theta(i)) / (4.0 * q * q - 1.0);
  }
  for (int i = 1; i < N; ++i) w(i) = 2.0 * v(i - 1) / N;
  return w;
}

Discretization build_discretization(const GeometryConfig& cfg) {
  cfg.validate();
  Discretization d;
  d.cfg = cfg;
  const int nx = cfg.n_x, nt = cfg.n_theta;
  const double L = cfg.length;
  const int N = nx - 1;

  d.cheb_nodes.resize(nx);
  d.x_nodes.resize(nx);
  for (int j = 0; j < nx; ++j) {
    d.cheb_nodes(j) = std::cos(kPi * j / N);
    // 1 - cos(a) = 2 sin^2(a/2) keeps x_0 exactly 0
    const double s = std::sin(kPi * j / (2.0 * N));
    d.x_nodes(j) = L * s * s;
  }
  d.x_nodes(nx - 1) = L;
  d.D_x = -(2.0 / L) * chebyshev_differentiation(nx);
  d.w_x = (L / 2.0) * clenshaw_curtis_weights(nx);

  d.tau.resize(N, nx);
  for (int p = 0; p < N; ++p) {
    for (int j = 0; j < nx; ++j) {
      double v = (2.0 / N) * std::cos(kPi * p * j / N);
      if (j == 0 || j == N) v *= 0.5;
      if (p == 0) v *= 0.5;
      d.tau(p, j) = v;
    }
  }

  d.theta_nodes.resize(nt);
  for (int j = 0; j < nt; ++j) d.theta_nodes(j) = 2.0 * kPi * j / nt;
  d.dft.resize(nt, nt);
  const double scale = 1.0 / std::sqrt(double(nt));
  for (int t = 0; t < nt; ++t)
    for (int j = 0; j < nt; ++j) d.dft(t, j) = scale * std::polar(1.0, -d.mode_number(t) * d.theta_nodes(j));
  VectorXc sym(nt);
  for (int t = 0; t < nt; ++t) sym(t) = kI * d.symbol(t);
  d.D_theta = d.dft.adjoint() * sym.asDiagonal() * d.dft;
  return d;
}

VectorXd Discretization::mass_interior() const {
  const Index k = cfg.rank;
  VectorXd m(interior_size());
  const double h = 2 * kPi / cfg.n_theta;
  for (int t = 0; t < cfg.n_theta; ++t)
    for (int j = 0; j < cfg.n_x; ++j)
      for (Index c = 0; c < k; ++c) m((Index(t) * cfg.n_x + j) * k + c) = w_x(j) * h;
  return m;
}

VectorXd Discretization::sobolev_weights(double s) const {
  VectorXd w(cfg.n_theta);
  for (int t = 0; t < cfg.n_theta; ++t) {
    const double n = mode_number(t);
    w(t) = std::pow(1.0 + n * n, s);
  }
  return w;
}

Eigen::RowVectorXd Discretization::interpolation_row(double x) const {
  const int n = cfg.n_x;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  const double t = 1.0 - 2.0 * x / cfg.length;
  for (int j = 0; j < n; ++j) {
    if (std::abs(t - cheb_nodes(j)) < 1e-15) {
      row(j) = 1.0;
      return row;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    double w = (j % 2 ? -1.0 : 1.0);
    if (j == 0 || j == n - 1) w *= 0.5;
    row(j) = w / (t - cheb_nodes(j));
    denom += row(j);
  }
  return row / denom;
}

VectorXc Discretization::to_modal(const VectorXc& nodal, Index blocks) const {
  const Index nt = cfg.n_theta;
  Eigen::Map<const MatrixXc> m(nodal.data(), blocks, nt);
  MatrixXc out = m * dft.transpose();
  return Eigen::Map<VectorXc>(out.data(), out.size());
}

VectorXc Discretization::to_nodal(const VectorXc& modal, Index blocks) const {
  const Index nt = cfg.n_theta;
  Eigen::Map<const MatrixXc> m(modal.data(), blocks, nt);
  MatrixXc out = m * dft.conjugate();
  return Eigen::Map<VectorXc>(out.data(), out.size());
}

double collar_width(double length) { return std::min(length / 4.0, 0.5); }

double bump_cutoff(double x, double delta) {
  const double r = std::abs(x) / delta;
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double gaussian_cutoff(double x, double delta) {
  const double r = x / delta;
  return std::exp(-2.5 * r * r);
}

double gaussian_cutoff_derivative(double x, double delta) {
  return -5.0 * x / (delta * delta) * gaussian_cutoff(x, delta);
}

TraceSystem trace_and_dual(const Discretization& disc) {
  const Index k = disc.k(), nx = disc.n_x(), nt = disc.n_theta();
  const Index ni = disc.interior_size(), nb = disc.boundary_size();
  using Triplet = Eigen::Triplet<Complex>;
  auto interior = [&](Index t, Index j, Index c) { return (t * nx + j) * k + c; };
  auto boundary = [&](Index t, Index side, Index c) { return (t * 2 + side) * k + c; };

  std::vector<Triplet> r0, rL, r, rs, ext;
  const double delta = collar_width(disc.cfg.length);
  for (Index t = 0; t < nt; ++t) {
    for (Index c = 0; c < k; ++c) {
      r0.emplace_back(t * k + c, interior(t, 0, c), 1.0);
      rL.emplace_back(t * k + c, interior(t, nx - 1, c), 1.0);
      for (Index side = 0; side < 2; ++side) {
        const Index j = side == 0 ? 0 : nx - 1;
        r.emplace_back(boundary(t, side, c), interior(t, j, c), 1.0);
        // M_b / M_int at the trace node
        rs.emplace_back(interior(t, j, c), boundary(t, side, c), 1.0 / disc.w_x(j));
        for (Index jj = 0; jj < nx; ++jj) {
          const double xp = side == 0 ? disc.x_nodes(jj) : disc.cfg.length - disc.x_nodes(jj);
          const double phi = bump_cutoff(xp, delta);
          if (phi != 0.0) ext.emplace_back(interior(t, jj, c), boundary(t, side, c), phi);
        }
      }
    }
  }
  TraceSystem ts;
  ts.rho_0.resize(nt * k, ni);
  ts.rho_0.setFromTriplets(r0.begin(), r0.end());
  ts.rho_L.resize(nt * k, ni);
  ts.rho_L.setFromTriplets(rL.begin(), rL.end());
  ts.rho.resize(nb, ni);
  ts.rho.setFromTriplets(r.begin(), r.end());
  ts.rho_star.resize(ni, nb);
  ts.rho_star.setFromTriplets(rs.begin(), rs.end());
  ts.extension_e.resize(ni, nb);
  ts.extension_e.setFromTriplets(ext.begin(), ext.end());

  std::vector<Triplet> rp, rm;
  for (Index i = 0; i < ni; ++i) {
    rp.emplace_back(i, i, 1.0);
    rm.emplace_back(i, ni + i, 1.0);
  }
  ts.r_plus.resize(ni, 2 * ni);
  ts.r_plus.setFromTriplets(rp.begin(), rp.end());
  ts.r_minus.resize(ni, 2 * ni);
  ts.r_minus.setFromTriplets(rm.begin(), rm.end());
  return ts;
}

double sobolev_weighted_norm(const VectorXc& v, double s, const Discretization& disc) {
  if (std::abs(s) > 1.0) throw_input("sobolev order |s| > 1 is outside the certified range");
  const Index per_node = v.size() / disc.n_theta();
  if (per_node * disc.n_theta() != v.size() || per_node % disc.k() != 0) {
    std::ostringstream msg;
    msg << "boundary data of length " << v.size() << " does not match the theta grid";
    throw_input(msg.str());
  }
  const VectorXc modal = disc.to_modal(v, per_node);
  const VectorXd w = disc.sobolev_weights(s);
  double acc = 0.0;
  for (Index t = 0; t < disc.n_theta(); ++t)
    acc += w(t) * modal.segment(t * per_node, per_node).squaredNorm();
  return std::sqrt(disc.mass_boundary() * acc);
}

}  // namespace calderonlab
