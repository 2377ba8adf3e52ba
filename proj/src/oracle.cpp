#include "calderonlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "calderonlab/correction.hpp"
#include "calderonlab/parallel.hpp"
#include "calderonlab/sectorial.hpp"

namespace calderonlab {

namespace odeint = boost::numeric::odeint;

const ModeSystem* OracleCauchySpace::find(int index) const {
  for (const auto& s : systems)
    if (s.index == index) return &s;
  return nullptr;
}

MatrixXc mode_generator(const OperatorSpec& spec, int mode, double x) {
  const MatrixXc J = spec.J.eval(x, 0.0);
  return kI * double(mode) * spec.beta1.eval(x, 0.0) + spec.beta0.eval(x, 0.0) +
         J.partialPivLu().solve(spec.C.eval(x, 0.0));
}

MatrixXc fundamental_solution(const OperatorSpec& spec, int mode, double x_end, double ode_tol, bool force_ode) {
  const Index k = spec.J.rank();
  const bool constant = spec.J.x_constant() && spec.beta1.x_constant() && spec.beta0.x_constant() &&
                        spec.C.x_constant();
  if (constant && !force_ode) {
    const MatrixXc G = mode_generator(spec, mode, 0.0);
    return MatrixXc((-x_end * G).exp());
  }
  using State = std::vector<Complex>;
  State phi(k * k, Complex(0));
  for (Index i = 0; i < k; ++i) phi[i * k + i] = 1.0;
  auto rhs = [&](const State& u, State& du, double x) {
    const MatrixXc G = mode_generator(spec, mode, x);
    Eigen::Map<const MatrixXc> U(u.data(), k, k);
    Eigen::Map<MatrixXc> dU(du.data(), k, k);
    dU = -G * U;
  };
  auto stepper = odeint::make_controlled(ode_tol, ode_tol, odeint::runge_kutta_fehlberg78<State>());
  if (x_end != 0.0) odeint::integrate_adaptive(stepper, rhs, phi, 0.0, x_end, x_end / 64);
  return Eigen::Map<MatrixXc>(phi.data(), k, k);
}

OracleCauchySpace mode_oracle_cauchy(const OperatorSpec& spec, const Discretization& disc, double ode_tol,
                                     int threads) {
  if (!spec.theta_constant()) throw_input("oracle requires θ-constant coefficients");
  OracleCauchySpace o;
  o.n_theta = disc.n_theta();
  o.k = disc.k();
  o.length = disc.cfg.length;
  const bool constant = spec.x_constant();
  for (int idx = 0; idx < o.n_theta; ++idx)
    if (!disc.is_nyquist(idx)) o.systems.push_back({idx, disc.mode_number(idx), constant, {}});
  o.basis.resize(o.systems.size());
  o.projection.resize(o.systems.size());
  parallel_for(o.systems.size(), threads, [&](Index s) {
    ModeSystem& ms = o.systems[s];
    ms.Phi = fundamental_solution(spec, ms.mode, o.length, ode_tol);
    MatrixXc span(2 * o.k, o.k);
    span.topRows(o.k).setIdentity();
    span.bottomRows(o.k) = ms.Phi;
    Eigen::HouseholderQR<MatrixXc> qr(span);
    o.basis[s] = qr.householderQ() * MatrixXc::Identity(2 * o.k, o.k);
    o.projection[s] = o.basis[s] * o.basis[s].adjoint();
  });
  return o;
}

OracleComparison compare_to_oracle(const CalderonBundle& bundle, const AssembledOperator& op,
                                   const OracleCauchySpace& oracle, int mode_limit, const Tolerances& tol) {
  const Discretization& disc = op.disc;
  if (oracle.n_theta != disc.n_theta() || oracle.k != disc.k() || oracle.length != disc.cfg.length)
    throw_input("geometry mismatch between oracle and Calderon bundle");
  OracleComparison cmp;
  cmp.mode_limit = mode_limit;
  cmp.mode_coupling = bundle.mode_coupling;
  cmp.expected_slope = -disc.cfg.length;
  const Index k = disc.k(), blk = 2 * k;
  std::vector<ModeProfile> aps;
  for (size_t s = 0; s < oracle.systems.size(); ++s) {
    const ModeSystem& ms = oracle.systems[s];
    const int g = op.groups.group_of[ms.index];
    const Index t = op.groups.local_of[ms.index];
    const MatrixXc block = bundle.groups[g].C_plus.block(t * blk, t * blk, blk, blk);
    const MatrixXc range = orthonormal_range(block, tol.rank_tol, tol.gap_ratio);
    OracleModeAngle a;
    a.mode = ms.mode;
    a.angle = max_principal_angle(oracle.basis[s], range);

    MatrixXc P = MatrixXc::Zero(blk, blk);
    for (int side = 0; side < 2; ++side) {
      const MatrixXc B = op.blocks[g].side[side].B0.block(t * k, t * k, k, k);
      P.block(side * k, side * k, k, k) =
          spectral_projection_oracle(B, Region::right_or_imaginary, imaginary_threshold(B, tol));
    }
    const MatrixXc aps_range = orthonormal_range(P, tol.rank_tol, tol.gap_ratio);
    a.aps_angle = max_principal_angle(aps_range, oracle.basis[s]);
    cmp.modes.push_back(a);
    aps.push_back({a.mode, std::sin(a.aps_angle)});
    if (std::abs(a.mode) <= mode_limit) cmp.global_distance = std::max(cmp.global_distance, a.angle);
  }
  std::sort(cmp.modes.begin(), cmp.modes.end(),
            [](const OracleModeAngle& x, const OracleModeAngle& y) { return x.mode < y.mode; });
  cmp.aps_slope = log_linear_slope(aps, 4, 16);
  return cmp;
}

double oracle_distance(const OracleCauchySpace& a, const OracleCauchySpace& b) {
  if (a.systems.size() != b.systems.size()) return kPi / 2;
  double d = 0.0;
  for (size_t s = 0; s < a.systems.size(); ++s) d = std::max(d, spectral_norm(a.projection[s] - b.projection[s]));
  return d;
}

ConstantUcpVerdict constant_coeff_ucp(const OperatorSpec& spec, const Discretization& disc,
                                      const std::vector<double>& x_samples) {
  if (!spec.theta_constant() || !spec.x_constant()) throw_input("constant-coefficient oracle inapplicable");
  ConstantUcpVerdict v;
  v.x_samples = x_samples;
  for (double x : x_samples) {
    double smin = std::numeric_limits<double>::infinity();
    int d = 0;
    for (int idx = 0; idx < disc.n_theta(); ++idx) {
      if (disc.is_nyquist(idx)) continue;
      // a solution vanishing on the circle at x is Phi(. - x) u(x) = 0
      for (double reach : {x, disc.cfg.length - x}) {
        const MatrixXc Phi = fundamental_solution(spec, disc.mode_number(idx), reach, 0.0);
        Eigen::JacobiSVD<MatrixXc> svd(Phi);
        const double s = svd.singularValues()(svd.singularValues().size() - 1);
        smin = std::min(smin, s);
        if (!(s > 0.0) || !std::isfinite(s)) d = std::max<int>(d, 1);
      }
    }
    v.d.push_back(d);
    v.min_sigma.push_back(smin);
    if (d != 0) v.d_zero = false;
  }
  v.verdict = v.d_zero ? "d = 0 at every sample" : "nonzero UCP defect";
  return v;
}

}  // namespace calderonlab
