#include <cmath>

#include "calderonlab/analysis.hpp"
#include "calderonlab/oracle.hpp"
#include "calderonlab/sectorial.hpp"
#include "doctest.h"

using namespace calderonlab;

namespace {
struct Run {
  AssembledOperator op;
  CalderonBundle bundle;
};
Run run(const OperatorSpec& spec) {
  Run r{assemble_operator(spec, build_discretization(spec.geometry)), {}};
  r.bundle = calderon(assemble_double(r.op), r.op);
  return r;
}
std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}
}  // namespace

TEST_CASE("direct cauchy space") {
  const auto cr = run(cauchy_riemann_spec(1.0, 32, 24));
  const auto cs = cauchy_space_direct(cr.op);
  CHECK(cs.dimension * 2 == cs.boundary_dimension);
  CHECK(cs.certified);
  const auto pi = projection_invariants(cr.bundle, cr.op, cs);
  CHECK(pi.direct_angle <= 1e-6);
  CHECK(pi.compl_residual <= 1e-8);
  CHECK(pi.idem_residual <= 1e-8);
  CHECK(pi.sym_residual <= 1e-8);

  // mode 3 is spanned by (1, e^3)
  const auto& op = cr.op;
  const int idx = op.disc.index_of_mode(3);
  MatrixXc line(2, 1);
  line << 1.0, std::exp(3.0);
  line.normalize();
  CHECK(max_principal_angle(line, cs.basis[op.groups.group_of[idx]]) <= 1e-10);

  const auto fine = cauchy_riemann_spec(1.0, 32, 48);
  const auto opf = assemble_operator(fine, build_discretization(fine.geometry));
  const auto csf = cauchy_space_direct(opf);
  double worst = 0.0;
  for (size_t g = 0; g < cs.basis.size(); ++g) worst = std::max(worst, max_principal_angle(cs.basis[g], csf.basis[g]));
  CHECK(worst <= 1e-6);

  const auto d = dirac_spec(1.0, 16, 12);
  const auto opd = assemble_operator(d, build_discretization(d.geometry));
  const auto csd = cauchy_space_direct(opd);
  const int z = opd.groups.group_of[opd.disc.index_of_mode(0)];
  MatrixXc constants(4, 2);
  constants << 1, 0, 0, 1, 1, 0, 0, 1;
  constants /= std::sqrt(2.0);
  CHECK(csd.basis[z].cols() == 2);
  CHECK(max_principal_angle(constants, csd.basis[z]) <= 1e-10);
}

TEST_CASE("lagrangian and cobordism") {
  const auto d = run(dirac_spec(1.0, 32, 24));
  const auto r = lagrangian_and_cobordism(d.op, d.bundle);
  MESSAGE("iso " << r.isotropy_residual << " angle " << r.transversality_angle << " sig " << r.signature
                 << " ind " << r.index_B_plus << " W0 " << r.dim_W0);
  CHECK(r.T_unitary_part);
  CHECK(r.isotropy_residual <= 1e-8);
  CHECK(r.transversality_angle >= 1e-3);
  CHECK(r.signature == 0);
  CHECK(r.dim_W0 > 0);
  CHECK(r.graded);
  CHECK(r.grading_defect <= 1e-10);
  CHECK(r.index_B_plus == 0);
  CHECK(r.lagrangian);

  const auto form = symplectic_form(d.op);
  CHECK(form.antisymmetry_defect <= 1e-14);
  CHECK(form.min_sigma > 0);

  const auto cr = run(cauchy_riemann_spec(1.0, 16, 12));
  CHECK_THROWS_WITH(lagrangian_and_cobordism(cr.op, cr.bundle), "Lagrangian check requires formally self-adjoint A");
}

TEST_CASE("signature does not depend on the W0 basis") {
  MatrixXc J(2, 2);
  J << 0, 1, -1, 0;
  const MatrixXc B = MatrixXc::Zero(2, 2);
  const ImaginaryData im = imaginary_signature_data(B, J, 1e-12);
  MatrixXc R(2, 2);
  R << Complex(1.0, 0.3), 2.0, Complex(0.0, -1.0), 0.5;
  Eigen::HouseholderQR<MatrixXc> qr(im.W0_basis * R);
  const MatrixXc V = qr.householderQ();
  const MatrixXc form = V.adjoint() * (kI * J) * V;
  CHECK(inertia(0.5 * (form + form.adjoint()), 1e-10).signature() == im.signature);
  CHECK(im.signature == 0);
}

TEST_CASE("ucp defect profile") {
  const auto cr = cauchy_riemann_spec(1.0, 16, 12);
  const auto op = assemble_operator(cr, build_discretization(cr.geometry));
  const std::vector<double> xs{0.0, 0.25, 0.5, 0.75};
  const auto prof = ucp_defect_profile(op, xs);
  CHECK(prof.conclusive);
  CHECK(prof.monotone);
  CHECK(prof.inner_index == 0);
  for (const auto& s : prof.samples) CHECK(s.d == 0);
  CHECK(constant_coeff_ucp(cr, op.disc, xs).d_zero);

  int runs = 0;
  for (const auto& spec : ucp_perturbation_suite(1.0, 16, 12)) {
    const auto o = assemble_operator(spec, build_discretization(spec.geometry));
    const auto p = ucp_defect_profile(o, xs);
    CHECK(p.conclusive);
    CHECK(p.inner_index == 0);
    ++runs;
  }
  CHECK(runs >= 5);
  CHECK_THROWS(ucp_defect_profile(op, {0.9}));
}

TEST_CASE("operator metrics") {
  const auto a = cauchy_riemann_spec(1.0, 16, 12);
  const auto zero = operator_metrics(a, a);
  CHECK(zero.N0 == 0.0);
  CHECK(zero.N1 == 0.0);

  auto b = a;
  b.C = CoefficientSeries::constant(MatrixXc::Constant(1, 1, Complex(0.3, 0.4)));
  const auto m = operator_metrics(a, b);
  CHECK(m.N0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m.d_str >= m.d0);

  auto c = a;
  c.beta0 = CoefficientSeries::constant(MatrixXc::Constant(1, 1, Complex(-0.2, 0.1)));
  const double ab = operator_metrics(a, b).d_str, bc = operator_metrics(b, c).d_str, ac = operator_metrics(a, c).d_str;
  CHECK(ac <= ab + bc + 1e-12);
  CHECK(operator_metrics(b, c).d_str == doctest::Approx(operator_metrics(c, b).d_str));
  CHECK_THROWS_WITH(operator_metrics(a, cauchy_riemann_spec(1.0, 16, 14)), "geometry mismatch");
}

TEST_CASE("jump flags") {
  const auto f = jump_flags({1, 1, 1, 10.5, 1, 1}, 1e-8);
  CHECK(f == std::vector<bool>{false, false, false, true, false, false});
  CHECK(jump_flags({0, 0, 1, 0, 0}, 1e-8) == std::vector<bool>{false, false, true, false, false});
  CHECK(jump_flags({0, 0, 1e-12, 0}, 1e-8) == std::vector<bool>(4, false));
}

TEST_CASE("continuity sweeps") {
  const auto zs = continuity_sweep(zeroth_order_family(1.0, 16, 12), grid(0.0, 0.1, 11), 0.0);
  REQUIRE(zs.points.size() == 11);
  MESSAGE("zeroth order: max ratio " << zs.max_step_ratio << " resolvent " << zs.resolvent_ratio_min << " .. "
                                     << zs.resolvent_ratio_max);
  CHECK(!zs.jump);
  CHECK(zs.points[0].dC == 0.0);
  CHECK(std::isfinite(zs.max_step_ratio));
  CHECK(zs.resolvent_stable);

  const auto cs = continuity_sweep(crossing_family(1.0, 16, 12), grid(-0.45, 0.45, 10), 0.0);
  CHECK(cs.jump);
  CHECK(cs.jump_steps == std::vector<int>{5});
  CHECK(cs.points[5].jump_P);
  CHECK(!cs.points[5].jump_C);

  CHECK_THROWS(continuity_sweep(zeroth_order_family(1.0, 16, 12), {0.0}, 0.7));
}
