#include "calderonlab/operator.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "calderonlab/linalg.hpp"
#include "calderonlab/parallel.hpp"
#include "calderonlab/sectorial.hpp"

namespace calderonlab {

std::string BoundaryMorphism::name() const {
  switch (kind) {
    case MorphismKind::inverse_J_adjoint: return "inverse_J_adjoint";
    case MorphismKind::J_unitary_part: return "J_unitary_part";
    case MorphismKind::explicit_matrix: return "explicit";
  }
  return "unknown";
}

void OperatorSpec::validate() const {
  geometry.validate();
  const Index k = geometry.rank;
  const std::pair<const char*, const CoefficientSeries*> all[] = {
      {"J", &J}, {"beta1", &beta1}, {"beta0", &beta0}, {"C", &C}};
  for (const auto& [label, s] : all) {
    if (s->rank() != k) throw_input(std::string("coefficient ") + label + " has the wrong rank");
    if (!s->is_finite()) throw_input(std::string("coefficient ") + label + " is not finite");
  }
  if (T.kind == MorphismKind::explicit_matrix) {
    for (const auto& t : T.explicit_T) {
      if (t.rank() != k) throw_input("boundary_morphism.explicit has the wrong rank");
      if (!t.x_constant()) throw_input("boundary_morphism.explicit must not depend on x");
      if (!t.is_finite()) throw_input("boundary_morphism.explicit is not finite");
    }
  }
}

bool OperatorSpec::theta_constant() const {
  bool t = J.theta_constant() && beta1.theta_constant() && beta0.theta_constant() && C.theta_constant();
  if (T.kind == MorphismKind::explicit_matrix)
    t = t && T.explicit_T[0].theta_constant() && T.explicit_T[1].theta_constant();
  return t;
}

bool OperatorSpec::x_constant() const {
  return J.x_constant() && beta1.x_constant() && beta0.x_constant() && C.x_constant();
}

std::vector<int> OperatorSpec::shifts() const {
  std::vector<int> out;
  for (const auto* s : {&J, &beta1, &beta0, &C})
    for (int m : s->support()) out.push_back(m);
  if (T.kind == MorphismKind::explicit_matrix)
    for (const auto& t : T.explicit_T)
      for (int m : t.support()) out.push_back(m);
  return out;
}

ModeGroups make_mode_groups(int n_theta, const std::vector<int>& shifts) {
  ModeGroups g;
  g.n_theta = n_theta;
  int stride = n_theta;
  for (int m : shifts) stride = std::gcd(stride, ((m % n_theta) + n_theta) % n_theta);
  g.stride = stride;
  g.members.resize(stride);
  g.group_of.resize(n_theta);
  g.local_of.resize(n_theta);
  for (int idx = 0; idx < n_theta; ++idx) {
    const int r = idx % stride;
    g.group_of[idx] = r;
    g.local_of[idx] = static_cast<int>(g.members[r].size());
    g.members[r].push_back(idx);
  }
  return g;
}

MatrixXc group_multiplier(const std::vector<MatrixXc>& hat, const std::vector<int>& members) {
  const Index N = static_cast<Index>(hat.size()), k = hat[0].rows(), gs = members.size();
  MatrixXc out(gs * k, gs * k);
  for (Index t = 0; t < gs; ++t)
    for (Index s = 0; s < gs; ++s) out.block(t * k, s * k, k, k) = hat[((members[t] - members[s]) % N + N) % N];
  return out;
}

std::vector<MatrixXc> modal_from_nodal(const std::vector<MatrixXc>& nodal) {
  const int N = static_cast<int>(nodal.size());
  const Index k = nodal[0].rows();
  std::vector<MatrixXc> hat(N, MatrixXc::Zero(k, k));
  for (int d = 0; d < N; ++d) {
    for (int j = 0; j < N; ++j) hat[d] += nodal[j] * std::polar(1.0 / N, -2.0 * kPi * double(d) * j / N);
  }
  return hat;
}

MatrixXc boundary_blockdiag(const MatrixXc& side0, const MatrixXc& sideL, Index k) {
  const Index gs = side0.rows() / k;
  MatrixXc out = MatrixXc::Zero(2 * gs * k, 2 * gs * k);
  for (Index t = 0; t < gs; ++t)
    for (Index s = 0; s < gs; ++s) {
      out.block((t * 2) * k, (s * 2) * k, k, k) = side0.block(t * k, s * k, k, k);
      out.block((t * 2 + 1) * k, (s * 2 + 1) * k, k, k) = sideL.block(t * k, s * k, k, k);
    }
  return out;
}

MatrixXc side_block(const MatrixXc& boundary, int side_row, int side_col, Index k) {
  const Index gs = boundary.rows() / (2 * k);
  MatrixXc out(gs * k, gs * k);
  for (Index t = 0; t < gs; ++t)
    for (Index s = 0; s < gs; ++s)
      out.block(t * k, s * k, k, k) = boundary.block((t * 2 + side_row) * k, (s * 2 + side_col) * k, k, k);
  return out;
}

MatrixXc side_selector(int side, Index group_size, Index k) {
  MatrixXc S = MatrixXc::Zero(group_size * k, 2 * group_size * k);
  for (Index t = 0; t < group_size; ++t)
    S.block(t * k, (t * 2 + side) * k, k, k).setIdentity();
  return S;
}

namespace {

std::string node_label(double x, double theta) {
  std::ostringstream s;
  s.precision(6);
  s << "(x=" << x << ", theta=" << theta << ")";
  return s.str();
}

MatrixXc morphism_at(const OperatorSpec& spec, const MatrixXc& J0, int side, double theta) {
  switch (spec.T.kind) {
    case MorphismKind::inverse_J_adjoint: return J0.adjoint().inverse();
    case MorphismKind::J_unitary_part: return unitary_part(J0);
    case MorphismKind::explicit_matrix: return spec.T.explicit_T[side].eval(0.0, theta);
  }
  return {};
}

// Pointwise checks: J invertible, symbol J (i xi + i zeta beta1) invertible off zero.
void pointwise_checks(const OperatorSpec& spec, const Discretization& disc, AssembledOperator& op) {
  double cond_max = 0.0, margin = std::numeric_limits<double>::infinity();
  constexpr int kAngles = 32;
  for (int j = 0; j < disc.n_x(); ++j) {
    for (int l = 0; l < disc.n_theta(); ++l) {
      const double x = disc.x_nodes(j), th = disc.theta_nodes(l);
      const MatrixXc J = spec.J.eval(x, th);
      Eigen::JacobiSVD<MatrixXc> svd(J);
      const auto& sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > 1e-14 * sv(0))) throw_input("J singular at node " + node_label(x, th));
      cond_max = std::max(cond_max, sv(0) / sv(sv.size() - 1));
      const MatrixXc b1 = spec.beta1.eval(x, th);
      Eigen::ComplexEigenSolver<MatrixXc> es(b1, false);
      for (Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-12 * (1.0 + std::abs(z)))
          throw_input("ellipticity violated at node " + node_label(x, th));
      }
      for (int a = 0; a < kAngles; ++a) {
        const double phi = 2 * kPi * a / kAngles;
        MatrixXc sym = kI * std::sin(phi) * b1;
        sym.diagonal().array() += kI * std::cos(phi);
        Eigen::JacobiSVD<MatrixXc> ss(J * sym);
        margin = std::min(margin, ss.singularValues()(ss.singularValues().size() - 1));
      }
    }
  }
  if (!(margin > 0.0)) throw_input("ellipticity violated");
  op.J_condition_max = cond_max;
  op.ellipticity_margin = margin;
}

struct NodeHats {
  std::vector<MatrixXc> J, E1, E0, Js, E1s, E0s;
};

GroupSide side_data(const OperatorSpec& spec, const Discretization& disc, const std::vector<int>& members,
                    const SideCollar& sc) {
  const int N = disc.n_theta();
  const Index k = disc.k(), gs = members.size();
  const double x = sc.x, o = sc.orient;
  GroupSide g;
  g.J0 = o * group_multiplier(spec.J.modal(x, N), members);
  g.T = group_multiplier(modal_from_nodal(sc.T_nodal), members);
  g.dJ = group_multiplier(spec.J.derivative_x().modal(x, N), members);

  const auto b1 = spec.beta1.modal(x, N), b0 = spec.beta0.modal(x, N);
  const auto b1s = spec.beta1.adjoint().modal(x, N), b0s = spec.beta0.adjoint().modal(x, N);
  const auto dE1 = spec.E1().derivative_x().modal(x, N), dE0 = spec.E0().derivative_x().modal(x, N);
  const auto dE1s = spec.E1().adjoint().derivative_x().modal(x, N);
  const auto dE0s = spec.E0().adjoint().derivative_x().modal(x, N);
  g.B0.resize(gs * k, gs * k);
  g.B0_t.resize(gs * k, gs * k);
  g.C1.resize(gs * k, gs * k);
  g.C1_tilde.resize(gs * k, gs * k);
  for (Index t = 0; t < gs; ++t)
    for (Index s = 0; s < gs; ++s) {
      const int d = ((members[t] - members[s]) % N + N) % N;
      const Complex is = kI * disc.symbol(members[s]), it = kI * disc.symbol(members[t]);
      g.B0.block(t * k, s * k, k, k) = o * (b1[d] * is + b0[d]);
      g.B0_t.block(t * k, s * k, k, k) = o * (-it * b1s[d] + b0s[d]);
      g.C1.block(t * k, s * k, k, k) = o * (dE1[d] * is + dE0[d]);
      g.C1_tilde.block(t * k, s * k, k, k) = o * (-it * dE1s[d] + dE0s[d]);
    }
  g.C0 = group_multiplier(spec.C.modal(x, N), members);
  g.C0_tilde = group_multiplier((spec.C.adjoint() - spec.J.derivative_x().adjoint()).modal(x, N), members);
  return g;
}

GroupOperator assemble_group(const OperatorSpec& spec, const Discretization& disc, const std::vector<NodeHats>& hats,
                             const std::vector<int>& members, const std::array<SideCollar, 2>& collar) {
  const int N = disc.n_theta(), nx = disc.n_x();
  const Index k = disc.k(), gs = members.size();
  const Index ni = gs * nx * k;
  GroupOperator g;
  g.modes = members;
  g.A = MatrixXc::Zero(ni, ni);
  g.At = MatrixXc::Zero(ni, ni);
  auto row = [&](Index t, Index j) { return (t * nx + j) * k; };
  for (Index t = 0; t < gs; ++t)
    for (Index s = 0; s < gs; ++s) {
      const int d = ((members[t] - members[s]) % N + N) % N;
      const Complex is = kI * disc.symbol(members[s]), it = kI * disc.symbol(members[t]);
      for (Index j = 0; j < nx; ++j) {
        const NodeHats& h = hats[j];
        const bool jz = h.J[d].isZero(0.0);
        for (Index jj = 0; jj < nx; ++jj) {
          const double D = disc.D_x(j, jj);
          if (!jz) g.A.block(row(t, j), row(s, jj), k, k) += D * h.J[d];
          if (!hats[jj].Js[d].isZero(0.0)) g.At.block(row(t, j), row(s, jj), k, k) -= D * hats[jj].Js[d];
        }
        g.A.block(row(t, j), row(s, j), k, k) += h.E1[d] * is + h.E0[d];
        g.At.block(row(t, j), row(s, j), k, k) += -it * h.E1s[d] + h.E0s[d];
      }
    }
  g.tau_rows = MatrixXc::Zero(gs * (nx - 1) * k, ni);
  g.rho = MatrixXc::Zero(2 * gs * k, ni);
  g.mass.resize(ni);
  for (Index t = 0; t < gs; ++t) {
    for (Index c = 0; c < k; ++c) {
      for (Index p = 0; p < nx - 1; ++p)
        for (Index j = 0; j < nx; ++j) g.tau_rows((t * (nx - 1) + p) * k + c, row(t, j) + c) = disc.tau(p, j);
      g.rho((t * 2) * k + c, row(t, 0) + c) = 1.0;
      g.rho((t * 2 + 1) * k + c, row(t, nx - 1) + c) = 1.0;
      for (Index j = 0; j < nx; ++j) g.mass(row(t, j) + c) = disc.w_x(j) * disc.mass_boundary();
    }
  }
  g.A_tau = g.tau_rows * g.A;
  g.At_tau = g.tau_rows * g.At;
  for (int side = 0; side < 2; ++side) g.side[side] = side_data(spec, disc, members, collar[side]);
  g.T = boundary_blockdiag(g.side[0].T, g.side[1].T, k);
  g.J0 = boundary_blockdiag(g.side[0].J0, g.side[1].J0, k);
  g.B0 = boundary_blockdiag(g.side[0].B0, g.side[1].B0, k);
  return g;
}

}  // namespace

AssembledOperator assemble_operator(const OperatorSpec& spec, const Discretization& disc,
                                    const AssemblyOptions& opts) {
  spec.validate();
  if (!(spec.geometry == disc.cfg)) throw_input("operator geometry does not match the discretization");
  AssembledOperator op;
  op.spec = spec;
  op.disc = disc;
  pointwise_checks(spec, disc, op);

  const int N = disc.n_theta();
  for (int side = 0; side < 2; ++side) {
    SideCollar& sc = op.collar[side];
    sc.x = side == 0 ? 0.0 : disc.cfg.length;
    sc.orient = side == 0 ? 1 : -1;
    for (int l = 0; l < N; ++l) {
      const double th = disc.theta_nodes(l);
      const MatrixXc J0 = double(sc.orient) * spec.J.eval(sc.x, th);
      MatrixXc T = morphism_at(spec, J0, side, th);
      Eigen::JacobiSVD<MatrixXc> svd(T);
      const auto& sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > 1e-14 * sv(0))) throw_input("T singular at node " + node_label(sc.x, th));
      sc.J0_nodal.push_back(J0);
      sc.T_nodal.push_back(T);
      sc.beta1_nodal.push_back(spec.beta1.eval(sc.x, th));
    }
  }

  std::vector<int> shifts = spec.shifts();
  shifts.insert(shifts.end(), opts.extra_shifts.begin(), opts.extra_shifts.end());
  op.groups = make_mode_groups(N, shifts);

  std::vector<NodeHats> hats(disc.n_x());
  const CoefficientSeries E1 = spec.E1(), E0 = spec.E0();
  const CoefficientSeries Js = spec.J.adjoint(), E1s = E1.adjoint(), E0s = E0.adjoint();
  for (int j = 0; j < disc.n_x(); ++j) {
    const double x = disc.x_nodes(j);
    hats[j] = {spec.J.modal(x, N), E1.modal(x, N), E0.modal(x, N), Js.modal(x, N), E1s.modal(x, N), E0s.modal(x, N)};
  }
  op.blocks.resize(op.groups.count());
  parallel_for(op.groups.count(), opts.threads, [&](Index g) {
    op.blocks[g] = assemble_group(spec, disc, hats, op.groups.members[g], op.collar);
  });

  double defect = 0.0, scale = 0.0;
  for (const auto& b : op.blocks) {
    defect = std::max(defect, (b.A - b.At).norm());
    scale = std::max(scale, b.A.norm());
  }
  op.self_adjoint_defect = scale > 0 ? defect / scale : 0.0;
  op.formally_self_adjoint = op.self_adjoint_defect <= 1e-10;
  green_defect(op);
  return op;
}

SlMap sl_map(const MatrixXc& J0, const MatrixXc& b0, const MatrixXc& T, double imag_tol_rel) {
  const double thr = imag_tol_rel * spectral_norm(b0);
  Eigen::ComplexEigenSolver<MatrixXc> es(b0, false);
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i).real()) <= thr) throw_input("symbol admits no spectral cutting");
  const OrderedSchur plus = ordered_schur(b0, [thr](Complex z) { return z.real() > thr; });
  const MatrixXc b0s = b0.adjoint();
  const OrderedSchur minus = ordered_schur(b0s, [thr](Complex z) { return z.real() < -thr; });
  const Index k = b0.rows();
  SlMap out;
  out.square = plus.selected + minus.selected == k;
  if (!out.square) return out;
  MatrixXc M(k, k);
  M.leftCols(plus.selected) = -J0.adjoint() * T * plus.U.leftCols(plus.selected);
  M.rightCols(minus.selected) = minus.U.leftCols(minus.selected);
  Eigen::JacobiSVD<MatrixXc> svd(M);
  out.sigma_min = svd.singularValues()(k - 1);
  out.determinant = M.determinant();
  return out;
}

SlReport check_ellipticity_and_sl(const AssembledOperator& op, const Tolerances& tol) {
  SlReport r;
  r.min_positivity_eigenvalue = std::numeric_limits<double>::infinity();
  r.min_sl_sigma = std::numeric_limits<double>::infinity();
  for (int side = 0; side < 2; ++side) {
    const SideCollar& sc = op.collar[side];
    for (int l = 0; l < op.disc.n_theta(); ++l) {
      const double th = op.disc.theta_nodes(l);
      const MatrixXc H = sc.J0_nodal[l].adjoint() * sc.T_nodal[l];
      const double hn = spectral_norm(H);
      if (spectral_norm(H - H.adjoint()) > 1e-10 * hn) {
        r.positivity = false;
        r.min_positivity_eigenvalue = std::min(r.min_positivity_eigenvalue, 0.0);
      } else {
        Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (H + H.adjoint()), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0);
        r.min_positivity_eigenvalue = std::min(r.min_positivity_eigenvalue, lo);
        if (!(lo > 0.0)) r.positivity = false;
      }
      for (int zeta : {1, -1}) {
        const MatrixXc b0 = (double(sc.orient) * kI * double(zeta)) * sc.beta1_nodal[l];
        SlMap m;
        try {
          m = sl_map(sc.J0_nodal[l], b0, sc.T_nodal[l], tol.imag_tol_rel);
        } catch (const Error&) {
          throw_input("symbol admits no spectral cutting at " + node_label(sc.x, th) +
                      " zeta=" + std::to_string(zeta));
        }
        const double s = m.square ? m.sigma_min : 0.0;
        r.min_sl_sigma = std::min(r.min_sl_sigma, s);
        if (!(s > 1e-10)) {
          r.sl_pass = false;
          r.witnesses.push_back({side, th, zeta, s});
        }
      }
    }
  }
  return r;
}

double green_pairing_defect(const AssembledOperator& op, Index group, const VectorXc& s, const VectorXc& sp) {
  const GroupOperator& b = op.blocks[group];
  const VectorXc As = b.A * s, Atsp = b.At * sp;
  Complex val = (As.array().conjugate() * b.mass.array() * sp.array()).sum();
  val -= (s.array().conjugate() * b.mass.array() * Atsp.array()).sum();
  const VectorXc rs = b.rho * s, rsp = b.rho * sp;
  val += op.disc.mass_boundary() * (b.J0 * rs).dot(rsp);
  return std::abs(val);
}

std::vector<TestSection> green_test_sections(Index k, int count) {
  std::mt19937_64 rng(0x5eed2024ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> kappa(-3.0, 3.0);
  std::uniform_int_distribution<int> mode(-3, 3);
  std::vector<TestSection> out(count);
  for (auto& s : out) {
    for (int q = 0; q < 3; ++q) {
      s.amplitude.emplace_back(normal(rng), normal(rng));
      s.kappa.push_back(kappa(rng));
      s.mode.push_back(mode(rng));
      VectorXc v(k);
      for (Index c = 0; c < k; ++c) v(c) = Complex(normal(rng), normal(rng));
      s.fiber.push_back(v);
    }
  }
  return out;
}

VectorXc sample_section(const TestSection& s, const AssembledOperator& op, Index group) {
  const Discretization& d = op.disc;
  const Index k = d.k(), nx = d.n_x();
  const auto& members = op.groups.members[group];
  VectorXc out = VectorXc::Zero(members.size() * nx * k);
  const double root = std::sqrt(double(d.n_theta()));
  for (size_t q = 0; q < s.mode.size(); ++q) {
    const int idx = d.index_of_mode(s.mode[q]);
    if (op.groups.group_of[idx] != group) continue;
    const Index t = op.groups.local_of[idx];
    for (Index j = 0; j < nx; ++j)
      out.segment((t * nx + j) * k, k) += root * s.amplitude[q] * std::exp(s.kappa[q] * d.x_nodes(j)) * s.fiber[q];
  }
  return out;
}

double green_defect(AssembledOperator& op) {
  const auto sections = green_test_sections(op.k(), 8);
  double worst = 0.0;
  for (size_t p = 0; p + 1 < sections.size(); p += 2) {
    double defect = 0.0, n1 = 0.0, n2 = 0.0;
    Complex total = 0.0;
    for (Index g = 0; g < op.groups.count(); ++g) {
      const VectorXc s = sample_section(sections[p], op, g), sp = sample_section(sections[p + 1], op, g);
      if (s.isZero(0.0) && sp.isZero(0.0)) continue;
      const auto& b = op.blocks[g];
      n1 += (s.array().abs2() * b.mass.array()).sum();
      n2 += (sp.array().abs2() * b.mass.array()).sum();
      const VectorXc As = b.A * s, Atsp = b.At * sp;
      total += (As.array().conjugate() * b.mass.array() * sp.array()).sum();
      total -= (s.array().conjugate() * b.mass.array() * Atsp.array()).sum();
      total += op.disc.mass_boundary() * (b.J0 * (b.rho * s)).dot(b.rho * sp);
    }
    if (n1 > 0 && n2 > 0) defect = std::abs(total) / std::sqrt(n1 * n2);
    worst = std::max(worst, defect);
  }
  op.green_defect_bound = worst;
  return worst;
}

}  // namespace calderonlab
