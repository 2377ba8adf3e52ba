#include "calderonlab/invertible_double.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "calderonlab/parallel.hpp"

namespace calderonlab {

MatrixXc GroupDouble::solve(const MatrixXc& rhs) const {
  const Index r = decision.rank;
  const MatrixXc coeff = U.leftCols(r).adjoint() * rhs;
  return V.leftCols(r) * (singular_values.head(r).cwiseInverse().asDiagonal() * coeff);
}

namespace {

MatrixXc double_matrix(const GroupOperator& b) {
  const Index ni = b.A.cols(), nt = b.A_tau.rows(), nb = b.rho.rows();
  MatrixXc M = MatrixXc::Zero(2 * nt + nb, 2 * ni);
  M.block(0, 0, nt, ni) = b.A_tau;
  M.block(nt, ni, nt, ni) = -b.At_tau;
  M.block(2 * nt, 0, nb, ni) = -b.T * b.rho;
  M.block(2 * nt, ni, nb, ni) = b.rho;
  return M;
}

}  // namespace

DoubleOperator assemble_double(const AssembledOperator& op, const Tolerances& tol, int threads) {
  DoubleOperator d;
  d.T_used = op.spec.T.name();
  d.positivity = check_ellipticity_and_sl(op, tol).positivity;
  d.groups.resize(op.groups.count());
  parallel_for(op.groups.count(), threads, [&](Index g) {
    GroupDouble& gd = d.groups[g];
    gd.matrix = double_matrix(op.blocks[g]);
    if (gd.matrix.rows() != gd.matrix.cols()) throw_input("double is not square");
    Eigen::BDCSVD<MatrixXc> svd(gd.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    gd.U = svd.matrixU();
    gd.V = svd.matrixV();
    gd.singular_values = svd.singularValues();
    gd.decision = decide_rank(gd.singular_values, gd.matrix.cols(), tol.rank_tol, tol.gap_ratio);
    gd.kernel = gd.V.rightCols(gd.decision.nullity);
    gd.cokernel = gd.U.rightCols(gd.matrix.rows() - gd.decision.rank);
  });
  d.min_gap_ratio = std::numeric_limits<double>::infinity();
  d.sigma_min = std::numeric_limits<double>::infinity();
  for (const auto& gd : d.groups) {
    d.kernel_dim += gd.decision.nullity;
    d.cokernel_dim += gd.cokernel.cols();
    d.min_gap_ratio = std::min(d.min_gap_ratio, gd.decision.gap_ratio);
    d.certified = d.certified && gd.decision.certified;
    if (gd.decision.rank > 0) d.sigma_min = std::min(d.sigma_min, gd.singular_values(gd.decision.rank - 1));
    d.sigma_max = std::max(d.sigma_max, gd.decision.sigma_max);
  }
  return d;
}

GhostSpaces ghost_solutions(const AssembledOperator& op, const Tolerances& tol, int threads) {
  GhostSpaces gs;
  const Index G = op.groups.count();
  gs.basis_A.resize(G);
  gs.basis_At.resize(G);
  std::vector<RankDecision> dA(G), dAt(G);
  parallel_for(G, threads, [&](Index g) {
    const auto& b = op.blocks[g];
    MatrixXc stacked(b.A_tau.rows() + b.rho.rows(), b.A.cols());
    stacked << b.A_tau, b.rho;
    gs.basis_A[g] = null_space(stacked, tol.rank_tol, tol.gap_ratio, &dA[g]);
    stacked << b.At_tau, b.rho;
    gs.basis_At[g] = null_space(stacked, tol.rank_tol, tol.gap_ratio, &dAt[g]);
  });
  gs.gap_A = gs.gap_At = std::numeric_limits<double>::infinity();
  for (Index g = 0; g < G; ++g) {
    if (!dA[g].certified || !dAt[g].certified) {
      std::ostringstream msg;
      msg << "ghost dimension unresolved in mode group " << g << " (gap ratios " << dA[g].gap_ratio << ", "
          << dAt[g].gap_ratio << ")";
      throw_resolution(msg.str());
    }
    gs.dim_A += dA[g].nullity;
    gs.dim_At += dAt[g].nullity;
    gs.gap_A = std::min(gs.gap_A, dA[g].gap_ratio);
    gs.gap_At = std::min(gs.gap_At, dAt[g].gap_ratio);
  }
  return gs;
}

double kernel_ghost_angle(const DoubleOperator& dbl, const GhostSpaces& ghosts) {
  double worst = 0.0;
  for (size_t g = 0; g < dbl.groups.size(); ++g) {
    const MatrixXc& za = ghosts.basis_A[g];
    const MatrixXc& zt = ghosts.basis_At[g];
    const Index ni = za.rows();
    MatrixXc stacked = MatrixXc::Zero(2 * ni, za.cols() + zt.cols());
    stacked.topLeftCorner(ni, za.cols()) = za;
    stacked.bottomRightCorner(ni, zt.cols()) = zt;
    worst = std::max(worst, max_principal_angle(dbl.groups[g].kernel, stacked));
  }
  return worst;
}

CalderonBundle calderon(const DoubleOperator& dbl, const AssembledOperator& op, const Tolerances& tol,
                        int threads) {
  CalderonBundle out;
  const Index G = op.groups.count();
  out.groups.resize(G);
  const double delta = collar_width(op.disc.cfg.length);
  const Index nx = op.n_x(), k = op.k();
  std::vector<double> idem(G), compl_(G), sym(G), ker(G), coupling(G);
  parallel_for(G, threads, [&](Index g) {
    const GroupOperator& b = op.blocks[g];
    const GroupDouble& gd = dbl.groups[g];
    const Index ni = b.A.cols(), nb = b.rho.rows(), nt = b.A_tau.rows();
    MatrixXc rhs = MatrixXc::Zero(gd.matrix.rows(), nb);
    rhs.bottomRows(nb) = -b.T;
    const MatrixXc F = gd.solve(rhs);
    CalderonGroup& cg = out.groups[g];
    cg.K_plus = F.topRows(ni);
    cg.K_minus = -F.bottomRows(ni);
    cg.C_plus = b.rho * cg.K_plus;
    cg.C_minus = b.T.partialPivLu().solve(b.rho * cg.K_minus);
    const MatrixXc I = MatrixXc::Identity(nb, nb);
    idem[g] = std::max(spectral_norm(cg.C_plus * cg.C_plus - cg.C_plus),
                       spectral_norm(cg.C_minus * cg.C_minus - cg.C_minus));
    compl_[g] = spectral_norm(cg.C_plus + cg.C_minus - I);
    sym[g] = std::max(spectral_norm(cg.C_plus - cg.C_plus.adjoint()),
                      spectral_norm(cg.C_minus - cg.C_minus.adjoint()));
    // A K+ on nodes farther than delta from the boundary, in L^2 over boundary L^2
    const MatrixXc AK = b.A * cg.K_plus;
    std::vector<Index> rows;
    for (Index t = 0; t * nx * k < ni; ++t)
      for (Index j = 0; j < nx; ++j) {
        const double x = op.disc.x_nodes(j);
        if (x > delta && x < op.disc.cfg.length - delta)
          for (Index c = 0; c < k; ++c) rows.push_back((t * nx + j) * k + c);
      }
    MatrixXc sel(rows.size(), nb);
    for (size_t r = 0; r < rows.size(); ++r) sel.row(r) = std::sqrt(b.mass(rows[r])) * AK.row(rows[r]);
    ker[g] = rows.empty() ? 0.0 : spectral_norm(sel) / std::sqrt(op.disc.mass_boundary());
    double off = 0.0;
    const Index blk = 2 * k;
    for (Index t = 0; t < nb / blk; ++t)
      for (Index s = 0; s < nb / blk; ++s)
        if (t != s) off += cg.C_plus.block(t * blk, s * blk, blk, blk).squaredNorm();
    coupling[g] = std::sqrt(off);
    (void)nt;
  });
  for (Index g = 0; g < G; ++g) {
    out.idem_residual = std::max(out.idem_residual, idem[g]);
    out.compl_residual = std::max(out.compl_residual, compl_[g]);
    out.sym_residual = std::max(out.sym_residual, sym[g]);
    out.kernel_residual = std::max(out.kernel_residual, ker[g]);
    out.mode_coupling = std::max(out.mode_coupling, coupling[g]);
  }
  out.sym_applicable = true;
  for (const auto& side : op.collar)
    for (size_t l = 0; l < side.J0_nodal.size(); ++l) {
      const MatrixXc H = side.J0_nodal[l].adjoint() * side.T_nodal[l];
      if ((H - MatrixXc::Identity(H.rows(), H.cols())).norm() > 1e-12) out.sym_applicable = false;
    }

  std::ostringstream msg;
  if (dbl.kernel_dim == 0) {
    if (out.compl_residual > 100 * tol.compl_tol) msg << " compl_residual=" << out.compl_residual;
    if (out.idem_residual > 100 * tol.idem_tol) msg << " idem_residual=" << out.idem_residual;
  }
  if (out.sym_applicable && out.sym_residual > 100 * tol.sym_tol) msg << " sym_residual=" << out.sym_residual;
  if (!msg.str().empty()) throw_inconsistent("Calderon construction inconsistent:" + msg.str());
  return out;
}

double double_symmetry_defect(const AssembledOperator& op) {
  const auto sections = green_test_sections(op.k(), 8);
  const double delta = collar_width(op.disc.cfg.length);
  const Index nx = op.n_x(), k = op.k();
  double worst = 0.0;
  auto build = [&](Index g, const TestSection& plus, const TestSection& minus) {
    const GroupOperator& b = op.blocks[g];
    const Index ni = b.A.cols(), gs = ni / (nx * k);
    VectorXc f(2 * ni);
    f.head(ni) = sample_section(plus, op, g);
    VectorXc u = sample_section(minus, op, g);
    // add a Gaussian-profile correction so that rho f- = T rho f+
    const VectorXc gap = b.T * (b.rho * f.head(ni)) - b.rho * u;
    for (Index t = 0; t < gs; ++t)
      for (Index j = 0; j < nx; ++j)
        for (int side = 0; side < 2; ++side) {
          const double xp = side == 0 ? op.disc.x_nodes(j) : op.disc.cfg.length - op.disc.x_nodes(j);
          u.segment((t * nx + j) * k, k) += gaussian_cutoff(xp, delta) * gap.segment((t * 2 + side) * k, k);
        }
    f.tail(ni) = u;
    return f;
  };
  for (size_t p = 0; p + 3 < sections.size(); p += 4) {
    Complex total = 0.0;
    double nf = 0.0, ng = 0.0;
    for (Index g = 0; g < op.groups.count(); ++g) {
      const GroupOperator& b = op.blocks[g];
      const Index ni = b.A.cols();
      const VectorXc f = build(g, sections[p], sections[p + 1]);
      const VectorXc h = build(g, sections[p + 2], sections[p + 3]);
      VectorXc Af(2 * ni), Ah(2 * ni);
      Af << b.A * f.head(ni), -(b.At * f.tail(ni));
      Ah << b.A * h.head(ni), -(b.At * h.tail(ni));
      for (Index half = 0; half < 2; ++half) {
        const auto m = b.mass.array();
        total += (Af.segment(half * ni, ni).array().conjugate() * m * h.segment(half * ni, ni).array()).sum();
        total -= (f.segment(half * ni, ni).array().conjugate() * m * Ah.segment(half * ni, ni).array()).sum();
        nf += (f.segment(half * ni, ni).array().abs2() * m).sum();
        ng += (h.segment(half * ni, ni).array().abs2() * m).sum();
      }
    }
    if (nf > 0 && ng > 0) worst = std::max(worst, std::abs(total) / std::sqrt(nf * ng));
  }
  return worst;
}

}  // namespace calderonlab
