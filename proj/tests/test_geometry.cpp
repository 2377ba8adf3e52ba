#include <cmath>
#include <random>

#include "calderonlab/geometry.hpp"
#include "doctest.h"

using namespace calderonlab;

namespace {
VectorXc random_vector(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorXc v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}
}  // namespace

TEST_CASE("fourier differentiation is exact on resolved modes") {
  const auto d = build_discretization({1.0, 16, 8, 1});
  for (int n = -7; n <= 7; ++n) {
    VectorXc u(16), du(16);
    for (int j = 0; j < 16; ++j) {
      u(j) = std::polar(1.0, n * d.theta_nodes(j));
      du(j) = kI * double(n) * u(j);
    }
    CHECK((d.D_theta * u - du).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("chebyshev differentiation is exact on polynomials") {
  const auto d = build_discretization({2.0, 8, 12, 1});
  for (int p = 0; p < 12; ++p) {
    VectorXd f = d.x_nodes.array().pow(p), df = p == 0 ? VectorXd::Zero(12) : VectorXd(p * d.x_nodes.array().pow(p - 1));
    CHECK((d.D_x * f - df).cwiseAbs().maxCoeff() <= 1e-9 * std::pow(2.0, p));
  }
}

TEST_CASE("interior mass integrates the constant to the cylinder area") {
  const auto d = build_discretization({2.0, 8, 8, 1});
  CHECK(std::abs(d.mass_interior().sum() - 4 * kPi) <= 1e-12);
  CHECK((d.sobolev_weights(0.0).array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("invalid geometry is rejected") {
  CHECK_THROWS_WITH(build_discretization({1.0, 7, 8, 1}), "n_theta must be even");
  CHECK_THROWS(build_discretization({0.0, 8, 8, 1}));
  CHECK_THROWS(build_discretization({1.0, 8, 4, 1}));
  CHECK_THROWS(build_discretization({1.0, 6, 8, 1}));
}

TEST_CASE("trace, extension and dual trace") {
  const auto d = build_discretization({1.0, 16, 10, 2});
  const auto ts = trace_and_dual(d);
  VectorXc xi(d.boundary_size());
  for (int j = 0; j < 16; ++j)
    for (int side = 0; side < 2; ++side)
      for (int c = 0; c < 2; ++c) xi((j * 2 + side) * 2 + c) = side == 0 ? std::polar(1.0, d.theta_nodes(j)) : Complex(0.0);
  CHECK((ts.rho * (ts.extension_e * xi) - xi).cwiseAbs().maxCoeff() == 0.0);
  const VectorXc circle0 = ts.rho_0 * (ts.extension_e * xi);
  for (int j = 0; j < 16; ++j) CHECK(std::abs(circle0(j * 2) - std::polar(1.0, d.theta_nodes(j))) == 0.0);

  const VectorXc r = random_vector(d.boundary_size(), 1), f = random_vector(d.interior_size(), 2);
  const VectorXd mi = d.mass_interior();
  const VectorXc rs = ts.rho_star * r;
  const Complex lhs = (rs.array().conjugate() * mi.array() * f.array()).sum();
  const Complex rhs = d.mass_boundary() * r.dot(ts.rho * f);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));

  const VectorXc ones = VectorXc::Ones(d.interior_size());
  CHECK(((ts.rho * ones).array() - 1.0).abs().maxCoeff() == 0.0);

  const VectorXc pair = random_vector(2 * d.interior_size(), 3);
  CHECK((ts.r_plus * pair - pair.head(d.interior_size())).norm() == 0.0);
  CHECK((ts.r_minus * pair - pair.tail(d.interior_size())).norm() == 0.0);
}

TEST_CASE("sobolev weighted norm") {
  const auto d = build_discretization({1.0, 16, 8, 1});
  VectorXc v(16);
  for (int j = 0; j < 16; ++j) v(j) = std::polar(1.0, 3 * d.theta_nodes(j));
  CHECK(sobolev_weighted_norm(v, 0.5, d) == doctest::Approx(std::pow(10.0, 0.25) * std::sqrt(2 * kPi)).epsilon(1e-13));
  CHECK(sobolev_weighted_norm(v, 0.0, d) == doctest::Approx(std::sqrt(d.mass_boundary()) * v.norm()).epsilon(1e-13));
  CHECK_THROWS(sobolev_weighted_norm(v, 1.5, d));

  const VectorXc a = random_vector(32, 4), b = random_vector(32, 5);
  double prev = 0.0;
  for (double s = -1.0; s <= 1.0; s += 0.25) {
    const double n = sobolev_weighted_norm(a, s, d);
    CHECK(n >= prev);
    prev = n;
    CHECK(sobolev_weighted_norm(Complex(2.0, -1.0) * a, s, d) == doctest::Approx(std::sqrt(5.0) * n).epsilon(1e-12));
    CHECK(sobolev_weighted_norm(a + b, s, d) <= n + sobolev_weighted_norm(b, s, d) + 1e-12);
  }
}

TEST_CASE("interpolation row reproduces polynomials") {
  const auto d = build_discretization({1.5, 8, 12, 1});
  VectorXd f = (d.x_nodes.array() * 2.0).sin();
  for (double x : {0.0, 0.1, 0.77, 1.5}) {
    VectorXd poly = d.x_nodes.array().pow(5);
    CHECK(std::abs(d.interpolation_row(x).dot(poly) - std::pow(x, 5)) <= 1e-12);
    CHECK(std::abs(d.interpolation_row(x).dot(f) - std::sin(2 * x)) <= 1e-7);
  }
}
