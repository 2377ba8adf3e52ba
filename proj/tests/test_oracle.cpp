#include <unsupported/Eigen/MatrixFunctions>

#include "calderonlab/models.hpp"
#include "calderonlab/oracle.hpp"
#include "calderonlab/sectorial.hpp"
#include "doctest.h"

using namespace calderonlab;

namespace {
OracleComparison run(const OperatorSpec& spec) {
  const auto op = assemble_operator(spec, build_discretization(spec.geometry));
  const auto bundle = calderon(assemble_double(op), op);
  return compare_to_oracle(bundle, op, mode_oracle_cauchy(spec, op.disc), 20);
}
}  // namespace

TEST_CASE("oracle cauchy spaces match the double") {
  const auto cr = run(cauchy_riemann_spec(1.0, 64, 48));
  MESSAGE("CR distance " << cr.global_distance << " aps slope " << cr.aps_slope);
  CHECK(cr.global_distance <= 1e-6);
  CHECK(cr.mode_coupling <= 1e-8);
  CHECK(std::abs(cr.aps_slope - cr.expected_slope) <= 0.2);

  const auto dirac = run(dirac_spec(1.0, 64, 48));
  MESSAGE("Dirac distance " << dirac.global_distance);
  CHECK(dirac.global_distance <= 1e-6);
}

TEST_CASE("oracle mode zero and identities") {
  const auto spec = cauchy_riemann_spec(1.0, 16, 12);
  const auto disc = build_discretization(spec.geometry);
  const auto o = mode_oracle_cauchy(spec, disc);
  CHECK(oracle_distance(o, o) == 0.0);
  const auto* zero = o.find(0);
  REQUIRE(zero != nullptr);
  CHECK((o.projection[0] - MatrixXc::Constant(2, 2, 0.5)).norm() <= 1e-14);

  const auto d = dirac_spec(1.0, 16, 12);
  const auto od = mode_oracle_cauchy(d, build_discretization(d.geometry));
  CHECK(od.basis[0].cols() == 2);
  CHECK((od.systems[0].Phi - MatrixXc::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("oracle integrator self-consistency") {
  const auto suite = ucp_perturbation_suite(1.0, 16, 12);
  const auto& xdep = suite[1];
  REQUIRE(!xdep.x_constant());
  for (int n : {0, 3, -5}) {
    const MatrixXc a = fundamental_solution(xdep, n, 1.0, 1e-12);
    const MatrixXc b = fundamental_solution(xdep, n, 1.0, 5e-13);
    CHECK((a - b).norm() <= 10 * 1e-12 * std::max(1.0, a.norm()));
  }
  const auto cr = cauchy_riemann_spec(1.0, 16, 12);
  const MatrixXc ex = fundamental_solution(cr, 4, 1.0, 1e-12);
  const MatrixXc ode = fundamental_solution(cr, 4, 1.0, 1e-12, true);
  CHECK(std::abs(ex(0, 0) - std::exp(4.0)) <= 1e-12 * std::exp(4.0));
  CHECK((ex - ode).norm() <= 1e-9 * ex.norm());
}

TEST_CASE("oracle of a direct sum") {
  const auto cr = cauchy_riemann_spec(1.0, 16, 12);
  auto dirac = dirac_spec(1.0, 16, 12);
  dirac.T.kind = cr.T.kind;
  const auto sum = direct_sum(cr, dirac);
  const auto disc = build_discretization(sum.geometry);
  const auto os = mode_oracle_cauchy(sum, disc);
  const auto oa = mode_oracle_cauchy(cr, build_discretization(cr.geometry));
  const auto ob = mode_oracle_cauchy(dirac, build_discretization(dirac.geometry));
  const std::vector<int> pa{0, 3}, pb{1, 2, 4, 5};
  double err = 0.0;
  for (size_t s = 0; s < os.systems.size(); ++s) {
    const MatrixXc& P = os.projection[s];
    for (size_t i = 0; i < pa.size(); ++i)
      for (size_t j = 0; j < pa.size(); ++j) err = std::max(err, std::abs(P(pa[i], pa[j]) - oa.projection[s](i, j)));
    for (size_t i = 0; i < pb.size(); ++i)
      for (size_t j = 0; j < pb.size(); ++j) err = std::max(err, std::abs(P(pb[i], pb[j]) - ob.projection[s](i, j)));
    for (int i : pa)
      for (int j : pb) err = std::max(err, std::abs(P(i, j)));
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("q family agrees with exp(-xB) on spectral subspaces") {
  MatrixXc B(3, 3);
  B << Complex(2.0, 1.0), 1.0, 0.5, 0.0, Complex(-1.5, 0.3), 2.0, 0.0, 0.0, Complex(0.7, -2.0);
  const MatrixXc Pp = spectral_projection_oracle(B, Region::right, 1e-12);
  const MatrixXc Pm = spectral_projection_oracle(B, Region::left, 1e-12);
  const QFamily qp(B, Family::plus, 1e-12, false), qm(B, Family::minus, 1e-12, false);
  for (double x : {0.0, 0.25, 1.0}) {
    CHECK((qp(x) - MatrixXc((-x * B).exp()) * Pp).norm() <= 1e-8);
    CHECK((qm(-x) - MatrixXc((x * B).exp()) * Pm).norm() <= 1e-8);
  }
}

TEST_CASE("constant coefficient ucp") {
  const auto cr = cauchy_riemann_spec(1.0, 16, 12);
  const auto v = constant_coeff_ucp(cr, build_discretization(cr.geometry), {0.0, 0.25, 0.5, 0.75});
  CHECK(v.d_zero);
  const auto d = dirac_spec(1.0, 16, 12);
  CHECK(constant_coeff_ucp(d, build_discretization(d.geometry), {0.0, 0.5}).d_zero);
  const auto suite = ucp_perturbation_suite(1.0, 16, 12);
  CHECK_THROWS_WITH(constant_coeff_ucp(suite[1], build_discretization(suite[1].geometry), {0.0}),
                    "constant-coefficient oracle inapplicable");
  CHECK_THROWS_WITH(mode_oracle_cauchy(suite[4], build_discretization(suite[4].geometry)),
                    "oracle requires θ-constant coefficients");
}
