#include "calderonlab/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "calderonlab/parallel.hpp"

namespace calderonlab {

namespace {

MatrixXc theta_derivative(const Discretization& disc, const std::vector<int>& members, Index k) {
  const Index gs = members.size();
  MatrixXc D = MatrixXc::Zero(gs * k, gs * k);
  for (Index t = 0; t < gs; ++t) D.block(t * k, t * k, k, k).diagonal().setConstant(kI * disc.symbol(members[t]));
  return D;
}

struct GroupResult {
  MatrixXc difference;  // C+ - formula on the full group
  MatrixXc P_plus;
  double condition = 0.0;
  double commutator = 0.0;
  double mismatch = 0.0;
  int nodes = 0;
};

GroupResult group_check(const DoubleOperator& dbl, const AssembledOperator& op, const CalderonBundle& bundle,
                        Index g, const Tolerances& tol, const ContourOverrides& over) {
  const Discretization& disc = op.disc;
  const GroupOperator& b = op.blocks[g];
  const auto& members = op.groups.members[g];
  const Index k = disc.k(), nx = disc.n_x(), gs = members.size(), N = disc.n_theta();
  const Index ni = b.A.cols(), nb = b.rho.rows();
  const double L = disc.cfg.length, delta = collar_width(L);
  const OperatorSpec& spec = op.spec;
  const CoefficientSeries E1 = spec.E1(), E0 = spec.E0();
  const CoefficientSeries Js = spec.J.adjoint(), dJs = spec.J.derivative_x().adjoint();
  const CoefficientSeries E1s = E1.adjoint(), E0s = E0.adjoint();
  const MatrixXc Dth = theta_derivative(disc, members, k);

  GroupResult res;
  MatrixXc S_plus = MatrixXc::Zero(ni, nb), S_minus = MatrixXc::Zero(ni, nb);
  std::array<MatrixXc, 2> Pp, Pm;
  for (int side = 0; side < 2; ++side) {
    const GroupSide& sd = b.side[side];
    const MatrixXc& B = sd.B0;
    const double orient = op.collar[side].orient;
    const double thr = tol.imag_tol_rel * spectral_norm(B);
    const QFamily qp(B, Family::plus, thr, true), qm(B, Family::minus, thr, false);
    Pp[side] = qp.projector();
    Pm[side] = qm.projector();

    const SpectralSplit split = sectorial_projection(B, default_contour(B, tol, over), tol);
    res.mismatch = std::max(res.mismatch, split.oracle_mismatch);
    res.nodes += split.quadrature_nodes;
    const MatrixXc H = sd.J0.adjoint() * sd.T;
    res.commutator = std::max(res.commutator, spectral_norm(sd.B0_t * H - H * sd.B0_t));

    const MatrixXc R = side_selector(side, gs, k);
    const MatrixXc Bs = B.adjoint();
    for (Index j = 0; j < nx; ++j) {
      const double x = disc.x_nodes(j), xp = side == 0 ? x : L - x;
      const double phi = gaussian_cutoff(xp, delta), dphi = gaussian_cutoff_derivative(xp, delta);
      if (phi < 1e-200) continue;
      const MatrixXc J = group_multiplier(spec.J.modal(x, N), members);
      const MatrixXc e1 = group_multiplier(E1.modal(x, N), members);
      const MatrixXc e0 = group_multiplier(E0.modal(x, N), members);
      const MatrixXc q = qp(xp);
      const MatrixXc sp = orient * J * (dphi * q - phi * B * q) + phi * (e1 * Dth + e0) * q;

      const MatrixXc qms = qm(-xp).adjoint();
      const MatrixXc v = phi * sd.T * qms;
      const MatrixXc dv = orient * (dphi * sd.T * qms + phi * sd.T * Bs * qms);
      const MatrixXc js = group_multiplier(Js.modal(x, N), members);
      const MatrixXc djs = group_multiplier(dJs.modal(x, N), members);
      const MatrixXc e1s = group_multiplier(E1s.modal(x, N), members);
      const MatrixXc e0s = group_multiplier(E0s.modal(x, N), members);
      const MatrixXc sm = -djs * v - js * dv - Dth * e1s * v + e0s * v;

      const MatrixXc sp_full = sp * R, sm_full = sm * R;
      for (Index t = 0; t < gs; ++t) {
        S_plus.middleRows((t * nx + j) * k, k) += sp_full.middleRows(t * k, k);
        S_minus.middleRows((t * nx + j) * k, k) += sm_full.middleRows(t * k, k);
      }
    }
  }
  const GroupDouble& gd = dbl.groups[g];
  const Index nt = b.A_tau.rows();
  MatrixXc rhs = MatrixXc::Zero(gd.matrix.rows(), nb);
  rhs.topRows(nt) = b.tau_rows * S_plus;
  rhs.middleRows(nt, nt) = b.tau_rows * S_minus;
  const MatrixXc Z = gd.solve(rhs);
  const MatrixXc P_plus = boundary_blockdiag(Pp[0], Pp[1], k);
  const MatrixXc P_minus = boundary_blockdiag(Pm[0], Pm[1], k);
  const MatrixXc M = P_plus + P_minus.adjoint();
  Eigen::JacobiSVD<MatrixXc> svd(M);
  const auto& sv = svd.singularValues();
  res.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(res.condition <= 1e8)) throw_resolution("correction formula ill-conditioned");
  const MatrixXc formula = (P_plus - b.rho * Z.topRows(ni)) * M.partialPivLu().inverse();
  res.difference = bundle.groups[g].C_plus - formula;
  res.P_plus = P_plus;
  return res;
}

}  // namespace

double log_linear_slope(const std::vector<ModeProfile>& profile, int lo, int hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : profile) {
    const int a = std::abs(p.mode);
    if (a < lo || a > hi || !(p.value > 0)) continue;
    const double y = std::log(p.value);
    sx += a;
    sy += y;
    sxx += double(a) * a;
    sxy += a * y;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CorrectionReport correction_formula_check(const DoubleOperator& dbl, const AssembledOperator& op,
                                          const CalderonBundle& bundle, const Tolerances& tol,
                                          const ContourOverrides& contour, int threads) {
  CorrectionReport rep;
  const Discretization& disc = op.disc;
  const Index k = disc.k(), G = op.groups.count();
  rep.resolved_mode_limit = disc.n_theta() / 4;
  rep.expected_slope = -disc.cfg.length;

  rep.commutator_zeroth_order = true;
  for (const auto& side : op.collar)
    for (size_t l = 0; l < side.J0_nodal.size(); ++l) {
      const MatrixXc H = side.J0_nodal[l].adjoint() * side.T_nodal[l];
      const MatrixXc b1s = side.beta1_nodal[l].adjoint();
      if ((b1s * H - H * b1s).norm() > 1e-10 * std::max(1.0, H.norm() * b1s.norm()))
        rep.commutator_zeroth_order = false;
    }
  if (!rep.commutator_zeroth_order)
    throw_input("correction formula needs [B0^t, J0^* T] of order zero");

  std::vector<GroupResult> results(G);
  parallel_for(G, threads, [&](Index g) { results[g] = group_check(dbl, op, bundle, g, tol, contour); });

  for (Index g = 0; g < G; ++g) {
    const auto& r = results[g];
    const auto& members = op.groups.members[g];
    rep.condition = std::max(rep.condition, r.condition);
    rep.commutator_norm = std::max(rep.commutator_norm, r.commutator);
    rep.sectorial_mismatch = std::max(rep.sectorial_mismatch, r.mismatch);
    rep.quadrature_nodes += r.nodes;
    std::vector<Index> idx;
    const Index blk = 2 * k;
    for (size_t t = 0; t < members.size(); ++t) {
      const int n = disc.mode_number(members[t]);
      if (!disc.is_nyquist(members[t]) && std::abs(n) <= rep.resolved_mode_limit)
        for (Index c = 0; c < blk; ++c) idx.push_back(t * blk + c);
      if (disc.is_nyquist(members[t])) continue;
      const MatrixXc diff = bundle.groups[g].C_plus.block(t * blk, t * blk, blk, blk) -
                            r.P_plus.block(t * blk, t * blk, blk, blk);
      rep.profile.push_back({n, spectral_norm(diff)});
    }
    if (!idx.empty()) {
      MatrixXc sub(idx.size(), idx.size());
      for (size_t a = 0; a < idx.size(); ++a)
        for (size_t c = 0; c < idx.size(); ++c) sub(a, c) = r.difference(idx[a], idx[c]);
      rep.residual = std::max(rep.residual, spectral_norm(sub));
    }
  }
  std::sort(rep.profile.begin(), rep.profile.end(), [](const ModeProfile& a, const ModeProfile& b) {
    return a.mode < b.mode;
  });
  rep.decay_slope = log_linear_slope(rep.profile, 4, 16);
  return rep;
}

}  // namespace calderonlab
