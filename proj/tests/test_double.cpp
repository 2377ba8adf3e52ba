#include <chrono>
#include <cmath>

#include "calderonlab/invertible_double.hpp"
#include "calderonlab/models.hpp"
#include "doctest.h"

using namespace calderonlab;

namespace {
MatrixXc mode_block(const AssembledOperator& op, const CalderonBundle& b, int n) {
  const int idx = op.disc.index_of_mode(n);
  const int g = op.groups.group_of[idx], t = op.groups.local_of[idx];
  const Index blk = 2 * op.k();
  return b.groups[g].C_plus.block(t * blk, t * blk, blk, blk);
}
}  // namespace

TEST_CASE("cauchy-riemann double and calderon projection") {
  const auto spec = cauchy_riemann_spec(1.0, 64, 48);
  const auto t0 = std::chrono::steady_clock::now();
  const auto op = assemble_operator(spec, build_discretization(spec.geometry));
  const auto dbl = assemble_double(op);
  const auto bundle = calderon(dbl, op);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("CR 64x48: " << secs << " s, compl " << bundle.compl_residual << ", idem " << bundle.idem_residual
                       << ", sym " << bundle.sym_residual << ", ker " << bundle.kernel_residual << ", gap "
                       << dbl.min_gap_ratio << ", sigma_min " << dbl.sigma_min);
  CHECK(dbl.kernel_dim == 0);
  CHECK(dbl.sigma_min > 1e-6);
  CHECK(bundle.compl_residual <= 1e-8);
  CHECK(bundle.idem_residual <= 1e-8);
  CHECK(bundle.sym_applicable);
  CHECK(bundle.sym_residual <= 1e-8);

  MatrixXc half = MatrixXc::Constant(2, 2, 0.5);
  CHECK((mode_block(op, bundle, 0) - half).norm() <= 1e-6);
  const double e = std::exp(1.0);
  MatrixXc one(2, 2);
  one << 1.0, e, e, e * e;
  one /= (1.0 + e * e);
  CHECK((mode_block(op, bundle, 1) - one).norm() <= 1e-6);

  const auto ghosts = ghost_solutions(op);
  CHECK(ghosts.dim_A == 0);
  CHECK(ghosts.dim_At == 0);
  CHECK(kernel_ghost_angle(dbl, ghosts) == 0.0);
}

TEST_CASE("dirac double is symmetric on smooth sections") {
  const auto spec = dirac_spec(1.0, 32, 32);
  const auto op = assemble_operator(spec, build_discretization(spec.geometry));
  const double defect = double_symmetry_defect(op);
  MESSAGE("dirac double symmetry defect " << defect);
  CHECK(defect <= 1e-8);
  const auto dbl = assemble_double(op);
  CHECK(dbl.kernel_dim == 0);
  const auto bundle = calderon(dbl, op);
  CHECK(bundle.compl_residual <= 1e-8);
}

TEST_CASE("double of a direct sum is the direct sum of doubles") {
  auto dirac = dirac_spec(1.0, 16, 12);
  dirac.T.kind = MorphismKind::inverse_J_adjoint;
  const auto cr = cauchy_riemann_spec(1.0, 16, 12);
  const auto sum = direct_sum(cr, dirac);
  const auto op_s = assemble_operator(sum, build_discretization(sum.geometry));
  const auto op_a = assemble_operator(cr, build_discretization(cr.geometry));
  const auto op_b = assemble_operator(dirac, build_discretization(dirac.geometry));
  const auto bs = calderon(assemble_double(op_s), op_s);
  const auto ba = calderon(assemble_double(op_a), op_a);
  const auto bb = calderon(assemble_double(op_b), op_b);
  double worst = 0.0;
  for (int n = -7; n <= 7; ++n) {
    const MatrixXc s = mode_block(op_s, bs, n), a = mode_block(op_a, ba, n), b = mode_block(op_b, bb, n);
    // boundary fibre order is (side, component); the sum interleaves components 0 | 1 2
    const int perm_a[] = {0, 3};
    const int perm_b[] = {1, 2, 4, 5};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(s(perm_a[i], perm_a[j]) - a(i, j)));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(s(perm_b[i], perm_b[j]) - b(i, j)));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(s(perm_a[i], perm_b[j])));
  }
  CHECK(worst <= 1e-10);
  const auto ghosts = ghost_solutions(op_s);
  CHECK(ghosts.dim_A == ghost_solutions(op_a).dim_A + ghost_solutions(op_b).dim_A);
}

#include "calderonlab/correction.hpp"

TEST_CASE("correction formula on cauchy-riemann") {
  const auto spec = cauchy_riemann_spec(1.0, 64, 48);
  const auto op = assemble_operator(spec, build_discretization(spec.geometry));
  const auto dbl = assemble_double(op);
  const auto bundle = calderon(dbl, op);
  const auto rep = correction_formula_check(dbl, op, bundle);
  MESSAGE("residual " << rep.residual << " slope " << rep.decay_slope << " cond " << rep.condition
                      << " mismatch " << rep.sectorial_mismatch);
  CHECK(rep.residual <= 1e-6);
  CHECK(std::abs(rep.decay_slope - rep.expected_slope) <= 0.2 * std::abs(rep.expected_slope));
  CHECK(rep.commutator_zeroth_order);
  CHECK(rep.commutator_norm == 0.0);
}
