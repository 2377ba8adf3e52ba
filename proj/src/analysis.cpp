#include "calderonlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "calderonlab/parallel.hpp"
#include "calderonlab/sectorial.hpp"

namespace calderonlab {

namespace {

double largest_singular_value(const MatrixXc& x) {
  if (x.size() == 0) return 0.0;
  if (std::min(x.rows(), x.cols()) <= 1200) {
    Eigen::BDCSVD<MatrixXc> svd(x);
    return svd.singularValues()(0);
  }
  // power iteration on x^* x from a fixed start
  VectorXc v = VectorXc::LinSpaced(x.cols(), 1.0, 2.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    VectorXc w = x.adjoint() * (x * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-13 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

// (1 + n^2)^{s/2} for each row of a group vector with `inner` entries per mode
VectorXd mode_weights(const Discretization& disc, const std::vector<int>& members, Index inner, double s) {
  VectorXd w(members.size() * inner);
  for (size_t t = 0; t < members.size(); ++t) {
    const double n = disc.symbol(members[t]);
    w.segment(t * inner, inner).setConstant(std::pow(1.0 + n * n, s / 2));
  }
  return w;
}

Index count_above(const VectorXd& sv, double threshold) {
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > threshold) ++r;
  return r;
}

// G^{-1/2} for the interior H^1 Gram matrix M + Dx^T M Dx + Dtheta^* M Dtheta of one group
MatrixXc h1_inverse_sqrt(const AssembledOperator& op, Index g) {
  const Discretization& disc = op.disc;
  const Index k = op.k(), nx = disc.n_x();
  const VectorXd wm = disc.w_x * disc.mass_boundary();
  const MatrixXd Mx = wm.asDiagonal();
  const MatrixXd stiff = disc.D_x.transpose() * Mx * disc.D_x;
  const auto& members = op.groups.members[g];
  const Index gs = members.size();
  MatrixXc R = MatrixXc::Zero(gs * nx * k, gs * nx * k);
  for (Index t = 0; t < gs; ++t) {
    const double n = disc.symbol(members[t]);
    const MatrixXd Gt = (1.0 + n * n) * Mx + stiff;
    const MatrixXc Rt = hermitian_inverse_sqrt(Gt.cast<Complex>());
    for (Index a = 0; a < nx; ++a)
      for (Index c = 0; c < nx; ++c)
        for (Index q = 0; q < k; ++q) R((t * nx + a) * k + q, (t * nx + c) * k + q) = Rt(a, c);
  }
  return R;
}

}  // namespace

CauchySpace cauchy_space_direct(const AssembledOperator& op, const Tolerances& tol, int threads) {
  const Index G = op.groups.count();
  CauchySpace cs;
  cs.basis.resize(G);
  std::vector<RankDecision> dec(G), trace_dec(G);
  parallel_for(G, threads, [&](Index g) {
    const GroupOperator& b = op.blocks[g];
    const MatrixXc N = null_space(b.A_tau, tol.rank_tol, tol.gap_ratio, &dec[g]);
    cs.basis[g] = orthonormal_range(b.rho * N, tol.rank_tol, tol.gap_ratio, &trace_dec[g]);
  });
  cs.min_gap_ratio = std::numeric_limits<double>::infinity();
  for (Index g = 0; g < G; ++g) {
    cs.dimension += cs.basis[g].cols();
    cs.boundary_dimension += op.blocks[g].rho.rows();
    cs.min_gap_ratio = std::min({cs.min_gap_ratio, dec[g].gap_ratio, trace_dec[g].gap_ratio});
    cs.certified = cs.certified && dec[g].certified && trace_dec[g].certified;
  }
  if (!cs.certified) throw_resolution("Cauchy space rank unresolved");
  return cs;
}

ProjectionInvariants projection_invariants(const CalderonBundle& bundle, const AssembledOperator& op,
                                           const CauchySpace& direct, const Tolerances& tol) {
  ProjectionInvariants pi;
  pi.idem_residual = bundle.idem_residual;
  pi.compl_residual = bundle.compl_residual;
  pi.sym_residual = bundle.sym_residual;
  pi.sym_applicable = bundle.sym_applicable;
  pi.kernel_residual = bundle.kernel_residual;
  pi.mode_coupling = bundle.mode_coupling;
  for (Index g = 0; g < op.groups.count(); ++g) {
    const MatrixXc qp = orthonormal_range(bundle.groups[g].C_plus, tol.rank_tol, tol.gap_ratio);
    const MatrixXc qm = orthonormal_range(bundle.groups[g].C_minus, tol.rank_tol, tol.gap_ratio);
    pi.rank_plus += qp.cols();
    pi.rank_minus += qm.cols();
    pi.direct_angle = std::max(pi.direct_angle, max_principal_angle(direct.basis[g], qp));
  }
  return pi;
}

SymplecticForm symplectic_form(const AssembledOperator& op) {
  SymplecticForm f;
  f.min_sigma = std::numeric_limits<double>::infinity();
  const double m = op.disc.mass_boundary();
  for (const auto& b : op.blocks) {
    const MatrixXc W = -m * b.J0;
    f.antisymmetry_defect = std::max(f.antisymmetry_defect, spectral_norm(W + W.adjoint()) / spectral_norm(W));
    Eigen::JacobiSVD<MatrixXc> svd(W);
    f.min_sigma = std::min(f.min_sigma, svd.singularValues()(svd.singularValues().size() - 1));
    f.W.push_back(W);
  }
  return f;
}

CobordismReport lagrangian_and_cobordism(const AssembledOperator& op, const CalderonBundle& bundle,
                                         const Tolerances& tol) {
  if (!op.formally_self_adjoint) throw_input("Lagrangian check requires formally self-adjoint A");
  const SymplecticForm form = symplectic_form(op);
  if (form.antisymmetry_defect > 1e-10) throw_input("signature undefined: J0 not skew-adjoint");

  CobordismReport r;
  r.T_unitary_part = true;
  for (const auto& side : op.collar)
    for (size_t l = 0; l < side.J0_nodal.size(); ++l)
      if ((side.T_nodal[l] - unitary_part(side.J0_nodal[l])).norm() > 1e-10 * side.T_nodal[l].norm())
        r.T_unitary_part = false;

  r.transversality_angle = kPi / 2;
  r.graded = true;
  for (Index g = 0; g < op.groups.count(); ++g) {
    const GroupOperator& b = op.blocks[g];
    const MatrixXc qp = orthonormal_range(bundle.groups[g].C_plus, tol.rank_tol, tol.gap_ratio);
    const MatrixXc qm = orthonormal_range(bundle.groups[g].C_minus, tol.rank_tol, tol.gap_ratio);
    r.dim_plus += qp.cols();
    r.dim_minus += qm.cols();
    r.boundary_dimension += b.rho.rows();
    // unit vectors in the mass inner product make the scalar mass cancel
    if (qp.cols() > 0) r.isotropy_residual = std::max(r.isotropy_residual, (qp.adjoint() * b.J0 * qp).cwiseAbs().maxCoeff());
    if (qm.cols() > 0) r.isotropy_residual_minus = std::max(r.isotropy_residual_minus, (qm.adjoint() * b.J0 * qm).cwiseAbs().maxCoeff());
    r.transversality_angle = std::min(r.transversality_angle, min_principal_angle(qp, qm));

    for (int side = 0; side < 2; ++side) {
      const GroupSide& sd = b.side[side];
      const ImaginaryData im = imaginary_signature_data(sd.B0, sd.J0, imaginary_threshold(sd.B0, tol));
      r.side_signature[side] += im.signature;
      r.dim_W0 += im.W0_basis.cols();

      const double bn = std::max(1.0, spectral_norm(sd.B0));
      const bool hermitian = spectral_norm(sd.B0 - sd.B0.adjoint()) <= 1e-10 * bn;
      const bool odd = spectral_norm(sd.J0 * sd.B0 + sd.B0 * sd.J0) <= 1e-10 * bn * spectral_norm(sd.J0);
      if (!hermitian || !odd) {
        r.graded = false;
        continue;
      }
      const MatrixXc alpha = kI * sd.J0 * hermitian_inverse_sqrt(sd.J0.adjoint() * sd.J0);
      const Index m = alpha.rows();
      r.grading_defect = std::max({r.grading_defect, spectral_norm(alpha * alpha - MatrixXc::Identity(m, m)),
                                   spectral_norm(alpha * sd.B0 + sd.B0 * alpha) / bn});
      Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (alpha + alpha.adjoint()));
      std::vector<Index> pos, neg;
      for (Index i = 0; i < m; ++i) (es.eigenvalues()(i) > 0 ? pos : neg).push_back(i);
      MatrixXc Vp(m, pos.size()), Vm(m, neg.size());
      for (size_t i = 0; i < pos.size(); ++i) Vp.col(i) = es.eigenvectors().col(pos[i]);
      for (size_t i = 0; i < neg.size(); ++i) Vm.col(i) = es.eigenvectors().col(neg[i]);
      const MatrixXc Bplus = Vm.adjoint() * sd.B0 * Vp;
      Index rank = 0;
      if (Bplus.size() > 0) {
        Eigen::JacobiSVD<MatrixXc> svd(Bplus);
        rank = count_above(svd.singularValues(), tol.rank_tol * bn);
      }
      const Index ker = Index(pos.size()) - rank, coker = Index(neg.size()) - rank;
      r.index_B_plus += int(ker - coker);
    }
  }
  if (r.grading_defect > 1e-10) r.graded = false;
  r.signature = r.side_signature[0] + r.side_signature[1];
  r.lagrangian = r.isotropy_residual <= tol.isotropy_tol && r.transversality_angle >= tol.transversality_min &&
                 r.dim_plus + r.dim_minus == r.boundary_dimension;
  return r;
}

UcpProfile ucp_defect_profile(const AssembledOperator& op, const std::vector<double>& x_samples,
                              const Tolerances& tol, int threads) {
  const Discretization& disc = op.disc;
  const double L = disc.cfg.length;
  for (double x : x_samples)
    if (x < 0.0 || x > 0.75 * L + 1e-14) throw_input("ucp sample outside [0, 3L/4]");
  std::vector<double> xs = x_samples;
  if (xs.empty() || xs.front() != 0.0) xs.insert(xs.begin(), 0.0);
  const Index k = op.k(), nx = disc.n_x(), G = op.groups.count();

  UcpProfile prof;
  prof.samples.resize(xs.size());
  std::vector<std::vector<RankDecision>> dA(xs.size(), std::vector<RankDecision>(G)), dAt = dA;
  parallel_for(xs.size() * G, threads, [&](Index job) {
    const Index i = job / G, g = job % G;
    const GroupOperator& b = op.blocks[g];
    const Index gs = op.group_size(g), ni = b.A.cols();
    const MatrixXc R = h1_inverse_sqrt(op, g);
    MatrixXc E = MatrixXc::Zero(2 * gs * k, ni);
    const double circles[2] = {xs[i], L - xs[i]};
    for (int c2 = 0; c2 < 2; ++c2) {
      const Eigen::RowVectorXd row = disc.interpolation_row(circles[c2]);
      for (Index t = 0; t < gs; ++t)
        for (Index c = 0; c < k; ++c)
          for (Index j = 0; j < nx; ++j) E((t * 2 + c2) * k + c, (t * nx + j) * k + c) = row(j);
    }
    for (int adj = 0; adj < 2; ++adj) {
      const MatrixXc& tauA = adj ? b.At_tau : b.A_tau;
      MatrixXc M(tauA.rows() + E.rows(), ni);
      M << tauA, E;
      M = M * R;  // ranks measured from H^1 into L^2
      Eigen::BDCSVD<MatrixXc> svd(M);
      (adj ? dAt : dA)[i][g] = decide_rank(svd.singularValues(), ni, tol.rank_tol, tol.gap_ratio);
    }
  });
  for (size_t i = 0; i < xs.size(); ++i) {
    UcpSample& s = prof.samples[i];
    s.x = xs[i];
    s.gap = s.gap_adjoint = std::numeric_limits<double>::infinity();
    for (Index g = 0; g < G; ++g) {
      s.d += dA[i][g].nullity;
      s.d_adjoint += dAt[i][g].nullity;
      s.gap = std::min(s.gap, dA[i][g].gap_ratio);
      s.gap_adjoint = std::min(s.gap_adjoint, dAt[i][g].gap_ratio);
      s.conclusive = s.conclusive && dA[i][g].certified && dAt[i][g].certified;
    }
    prof.conclusive = prof.conclusive && s.conclusive;
    if (i > 0 && s.d > prof.samples[i - 1].d) prof.monotone = false;
  }
  prof.inner_index = int(prof.samples[0].d) - int(prof.samples[0].d_adjoint);
  return prof;
}

namespace {

struct Weights {
  std::vector<MatrixXc> h1_inv_sqrt;  // per group, interior
  std::vector<VectorXd> mass_sqrt;
  std::vector<VectorXd> side_h1;      // (1 + n^2)^{1/2} per side row
  std::vector<VectorXd> bdry_half;    // (1 + n^2)^{1/4} per boundary row
};

Weights metric_weights(const AssembledOperator& op) {
  const Discretization& disc = op.disc;
  const Index k = op.k();
  Weights w;
  for (Index g = 0; g < op.groups.count(); ++g) {
    const auto& members = op.groups.members[g];
    w.h1_inv_sqrt.push_back(h1_inverse_sqrt(op, g));
    w.mass_sqrt.push_back(op.blocks[g].mass.cwiseSqrt());
    w.side_h1.push_back(mode_weights(disc, members, k, 1.0));
    w.bdry_half.push_back(mode_weights(disc, members, 2 * k, 0.5));
  }
  return w;
}

}  // namespace

MetricReport operator_metrics(const AssembledOperator& a, const AssembledOperator& b) {
  const auto& ga = a.disc.cfg;
  const auto& gb = b.disc.cfg;
  if (ga.length != gb.length || ga.n_theta != gb.n_theta || ga.n_x != gb.n_x || ga.rank != gb.rank)
    throw_input("geometry mismatch");
  if (a.groups.members != b.groups.members) throw_inconsistent("metric needs a common mode-group structure");
  const Weights w = metric_weights(a);
  double nA = 0, nAt = 0, nT = 0;
  double nB0 = 0, nB0t = 0, nComm = 0, nT0 = 0, nJ0 = 0, nC1 = 0, ndJ = 0, nC0 = 0, nC1t = 0, nC0t = 0;
  for (Index g = 0; g < a.groups.count(); ++g) {
    const GroupOperator &x = a.blocks[g], &y = b.blocks[g];
    const auto m = w.mass_sqrt[g].asDiagonal();
    nA = std::max(nA, largest_singular_value(m * (x.A - y.A) * w.h1_inv_sqrt[g]));
    nAt = std::max(nAt, largest_singular_value(m * (x.At - y.At) * w.h1_inv_sqrt[g]));
    const VectorXd& h = w.bdry_half[g];
    nT = std::max(nT, largest_singular_value(h.asDiagonal() * (x.T - y.T) * h.cwiseInverse().asDiagonal()));
    const auto h1inv = w.side_h1[g].cwiseInverse().asDiagonal();
    for (int s = 0; s < 2; ++s) {
      const GroupSide &p = x.side[s], &q = y.side[s];
      nB0 = std::max(nB0, largest_singular_value((p.B0 - q.B0) * h1inv));
      nB0t = std::max(nB0t, largest_singular_value((p.B0_t - q.B0_t) * h1inv));
      const MatrixXc Hp = p.J0.adjoint() * p.T, Hq = q.J0.adjoint() * q.T;
      nComm = std::max(nComm, largest_singular_value((p.B0_t * Hp - Hp * p.B0_t) - (q.B0_t * Hq - Hq * q.B0_t)));
      nT0 = std::max(nT0, largest_singular_value(p.T - q.T));
      nJ0 = std::max(nJ0, largest_singular_value(p.J0 - q.J0));
      nC1 = std::max(nC1, largest_singular_value((p.C1 - q.C1) * h1inv));
      ndJ = std::max(ndJ, largest_singular_value(p.dJ - q.dJ));
      nC0 = std::max(nC0, largest_singular_value(p.C0 - q.C0));
      nC1t = std::max(nC1t, largest_singular_value((p.C1_tilde - q.C1_tilde) * h1inv));
      nC0t = std::max(nC0t, largest_singular_value(p.C0_tilde - q.C0_tilde));
    }
  }
  MetricReport r;
  r.N0 = nA + nAt + nT;
  r.N1 = nB0 + nB0t + nComm + nT0 + nJ0 + nC1 + ndJ + nC0 + nC1t + nC0t;
  r.d0 = r.N0;
  r.d_str = r.N0 + r.N1;
  return r;
}

MetricReport operator_metrics(const OperatorSpec& a, const OperatorSpec& b, int threads) {
  const auto& ga = a.geometry;
  const auto& gb = b.geometry;
  if (ga.length != gb.length || ga.n_theta != gb.n_theta || ga.n_x != gb.n_x || ga.rank != gb.rank)
    throw_input("geometry mismatch");
  const Discretization disc = build_discretization(ga);
  AssemblyOptions oa, ob;
  oa.threads = ob.threads = threads;
  oa.extra_shifts = b.shifts();
  ob.extra_shifts = a.shifts();
  return operator_metrics(assemble_operator(a, disc, oa), assemble_operator(b, disc, ob));
}

std::vector<bool> jump_flags(const std::vector<double>& steps, double floor) {
  const int n = steps.size();
  std::vector<bool> flags(n, false);
  for (int i = 0; i < n; ++i) {
    std::vector<double> nb;
    for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
      if (j != i) nb.push_back(steps[j]);
    if (nb.empty()) continue;
    std::sort(nb.begin(), nb.end());
    const size_t h = nb.size() / 2;
    const double median = nb.size() % 2 ? nb[h] : 0.5 * (nb[h - 1] + nb[h]);
    flags[i] = steps[i] > floor && steps[i] > 10.0 * median;
  }
  return flags;
}

namespace {

struct SweepState {
  AssembledOperator op;
  std::vector<MatrixXc> C_plus, P_plus, inverse;
  double compl_residual = 0.0;
};

double weighted_norm(const std::vector<MatrixXc>& x, const std::vector<MatrixXc>& y, const AssembledOperator& op,
                     double s) {
  double out = 0.0;
  for (Index g = 0; g < op.groups.count(); ++g) {
    const VectorXd w = mode_weights(op.disc, op.groups.members[g], 2 * op.k(), s);
    const MatrixXc d = y.empty() ? x[g] : MatrixXc(x[g] - y[g]);
    out = std::max(out, largest_singular_value(w.asDiagonal() * d * w.cwiseInverse().asDiagonal()));
  }
  return out;
}

double plain_norm(const std::vector<MatrixXc>& x, const std::vector<MatrixXc>& y) {
  double out = 0.0;
  for (size_t g = 0; g < x.size(); ++g) out = std::max(out, largest_singular_value(x[g] - y[g]));
  return out;
}

}  // namespace

SweepReport continuity_sweep(const SpecFamily& family, const std::vector<double>& s_grid, double sobolev_s,
                             const Tolerances& tol, int threads) {
  if (std::abs(sobolev_s) > 0.5) throw_input("sobolev_s must lie in [-1/2, 1/2]");
  if (s_grid.empty()) throw_input("empty sweep grid");
  const Index n = s_grid.size();
  std::vector<OperatorSpec> specs;
  std::set<int> shifts;
  for (double s : s_grid) {
    specs.push_back(family(s));
    for (int m : specs.back().shifts()) shifts.insert(m);
  }
  AssemblyOptions opts;
  opts.extra_shifts.assign(shifts.begin(), shifts.end());
  const Discretization disc = build_discretization(family.base.geometry);

  std::vector<SweepState> st(n);
  std::vector<std::string> failure(n);
  parallel_for(n, threads, [&](Index i) {
    try {
      SweepState& x = st[i];
      x.op = assemble_operator(specs[i], disc, opts);
      const DoubleOperator dbl = assemble_double(x.op, tol);
      const CalderonBundle bundle = calderon(dbl, x.op, tol);
      x.compl_residual = bundle.compl_residual;
      const Index k = x.op.k();
      for (Index g = 0; g < x.op.groups.count(); ++g) {
        x.C_plus.push_back(bundle.groups[g].C_plus);
        std::array<MatrixXc, 2> P;
        for (int side = 0; side < 2; ++side) {
          const MatrixXc& B = x.op.blocks[g].side[side].B0;
          P[side] = spectral_projection_oracle(B, Region::right_or_imaginary, imaginary_threshold(B, tol));
        }
        x.P_plus.push_back(boundary_blockdiag(P[0], P[1], k));
        const GroupDouble& gd = dbl.groups[g];
        const Index r = gd.decision.rank;
        x.inverse.push_back(gd.V.leftCols(r) * gd.singular_values.head(r).cwiseInverse().asDiagonal() *
                            gd.U.leftCols(r).adjoint());
      }
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  });
  for (Index i = 0; i < n; ++i) {
    if (failure[i].empty()) continue;
    std::ostringstream msg;
    msg << "sweep member s = " << s_grid[i] << " failed: " << failure[i];
    throw_inconsistent(msg.str());
  }

  SweepReport rep;
  rep.parameter = sweep_parameter_name(family.parameter);
  rep.sobolev_s = sobolev_s;
  std::vector<double> stepC, stepP;
  for (Index i = 0; i < n; ++i) {
    SweepPoint p;
    p.s = s_grid[i];
    p.compl_residual = st[i].compl_residual;
    p.dC = weighted_norm(st[i].C_plus, st[0].C_plus, st[i].op, sobolev_s);
    p.C_norm = weighted_norm(st[i].C_plus, {}, st[i].op, sobolev_s);
    const MetricReport m0 = operator_metrics(st[i].op, st[0].op);
    p.d0 = m0.d0;
    p.d_str = m0.d_str;
    if (i > 0) {
      p.step_dC = weighted_norm(st[i].C_plus, st[i - 1].C_plus, st[i].op, sobolev_s);
      p.step_dP = plain_norm(st[i].P_plus, st[i - 1].P_plus);
      const MetricReport m = operator_metrics(st[i].op, st[i - 1].op);
      p.step_d0 = m.d0;
      p.step_d_str = m.d_str;
      p.step_ratio = m.d_str > 0 ? p.step_dC / m.d_str : std::numeric_limits<double>::infinity();
      p.step_resolvent = plain_norm(st[i].inverse, st[i - 1].inverse);
      p.resolvent_ratio = m.d0 > 0 ? p.step_resolvent / m.d0 : std::numeric_limits<double>::infinity();
      stepC.push_back(p.step_dC);
      stepP.push_back(p.step_dP);
    }
    rep.max_C_norm = std::max(rep.max_C_norm, p.C_norm);
    rep.points.push_back(p);
  }
  const auto fc = jump_flags(stepC, 1e-8), fp = jump_flags(stepP, 1e-8);
  rep.resolvent_ratio_min = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < n; ++i) {
    SweepPoint& p = rep.points[i];
    p.jump_C = fc[i - 1];
    p.jump_P = fp[i - 1];
    if (p.jump_C || p.jump_P) {
      rep.jump = true;
      rep.jump_steps.push_back(int(i));
    }
    rep.max_step_ratio = std::max(rep.max_step_ratio, p.step_ratio);
    rep.resolvent_ratio_min = std::min(rep.resolvent_ratio_min, p.resolvent_ratio);
    rep.resolvent_ratio_max = std::max(rep.resolvent_ratio_max, p.resolvent_ratio);
  }
  rep.resolvent_stable = n > 1 && std::isfinite(rep.resolvent_ratio_max) && rep.resolvent_ratio_min > 0 &&
                         rep.resolvent_ratio_max <= 10.0 * rep.resolvent_ratio_min;
  return rep;
}

}  // namespace calderonlab
