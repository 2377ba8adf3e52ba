#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "calderonlab/linalg.hpp"
#include "calderonlab/sectorial.hpp"
#include "doctest.h"

using namespace calderonlab;

namespace {
MatrixXc diag2(Complex a, Complex b) {
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
}  // namespace

TEST_CASE("schur oracle projections") {
  CHECK((spectral_projection_oracle(diag2(1.0, -1.0), Region::right, 1e-12) - diag2(1.0, 0.0)).norm() <= 1e-14);
  MatrixXc B(2, 2);
  B << 1.0, 5.0, 0.0, -1.0;
  MatrixXc expected(2, 2);
  expected << 1.0, 2.5, 0.0, 0.0;
  CHECK((spectral_projection_oracle(B, Region::right, 1e-12) - expected).norm() <= 1e-13);

  MatrixXc jordan = MatrixXc::Identity(3, 3);
  jordan(0, 1) = jordan(1, 2) = 1.0;
  CHECK((spectral_projection_oracle(jordan, Region::right, 1e-12) - MatrixXc::Identity(3, 3)).norm() <= 1e-14);
  CHECK_THROWS(spectral_projection_oracle(diag2(1.0, 0.0), Region::right, 1e-9));
}

TEST_CASE("quadrature projection on a diagonal matrix") {
  const MatrixXc B = diag2(2.0, -3.0);
  SectorialContour c;
  c.cut_radius = 0.5;
  c.truncation_radius = 12.0;
  c.n_quad = 512;
  CHECK((contour_projection(B, c) - diag2(1.0, 0.0)).norm() <= 1e-8);
  const auto split = sectorial_projection(B, c, Tolerances{});
  CHECK(split.rank_plus == 1);
  CHECK(split.rank_minus == 1);
  CHECK(split.dim_W0 == 0);
}

TEST_CASE("hermitian matrices match the eigendecomposition indicator") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXc X(6, 6);
    for (Index i = 0; i < 36; ++i) X(i) = Complex(g(rng), g(rng));
    const MatrixXc H = X + X.adjoint();
    const auto split = sectorial_projection(H, Tolerances{});
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(H);
    VectorXd ind = (es.eigenvalues().array() > 0).cast<double>();
    const MatrixXc P = es.eigenvectors() * ind.asDiagonal() * es.eigenvectors().adjoint();
    CHECK(spectral_norm(split.P_plus - P) <= 1e-10);
  }
}

TEST_CASE("q family") {
  const MatrixXc B = diag2(2.0, -3.0);
  CHECK((q_family(B, Family::plus, 0.5, 1e-12) - diag2(std::exp(-1.0), 0.0)).norm() <= 1e-14);
  CHECK((q_family(B, Family::minus, -0.5, 1e-12) - diag2(0.0, std::exp(-1.5))).norm() <= 1e-14);
  const MatrixXc sum = q_family(B, Family::plus, 1e-9, 1e-12) + q_family(B, Family::minus, -1e-9, 1e-12);
  CHECK((sum - MatrixXc::Identity(2, 2)).norm() <= 1e-8);
  CHECK_THROWS(q_family(B, Family::plus, -0.5, 1e-12));

  MatrixXc N(3, 3);
  N << 1.0, 4.0, -2.0, 0.0, -0.5, 3.0, 0.0, 0.0, 2.0;
  const QFamily q(N, Family::plus, 1e-12, false);
  MatrixXc reference = (-0.3 * N).exp() * q.projector();
  CHECK((q(0.3) - reference).norm() <= 1e-12);
}

TEST_CASE("imaginary signature data") {
  MatrixXc J0(2, 2);
  J0 << 0.0, 1.0, -1.0, 0.0;
  MatrixXc B(2, 2);
  B << 0.0, 1.0, -1.0, 0.0;  // eigenvalues +-i
  const auto d = imaginary_signature_data(B, J0, 1e-9);
  CHECK(d.W0_basis.cols() == 2);
  CHECK(d.signature == 0);
  CHECK(d.positive == 1);

  const auto none = imaginary_signature_data(diag2(1.0, -1.0), J0, 1e-9);
  CHECK(none.W0_basis.cols() == 0);
  CHECK(none.signature == 0);
  CHECK_THROWS_WITH(imaginary_signature_data(B, MatrixXc::Identity(2, 2), 1e-9),
                    "signature undefined: J0 not skew-adjoint");
}

TEST_CASE("uniform quadrature converges when the node count doubles") {
  MatrixXc B(3, 3);
  B << 1.5, 2.0, 0.0, 0.0, -2.0, 1.0, 0.0, 0.0, 3.0;
  const MatrixXc P = spectral_projection_oracle(B, Region::right, 1e-12);
  SectorialContour c = default_contour(B, Tolerances{});
  c.adaptive = false;
  c.order = 4;
  double prev = 1.0;
  for (int n : {128, 256, 512}) {
    c.n_quad = n;
    const double err = spectral_norm(contour_projection(B, c) - P);
    if (prev > 1e-12) CHECK(err * 4 <= prev);
    prev = err;
  }
}
