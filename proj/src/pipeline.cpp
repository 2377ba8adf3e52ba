#include "calderonlab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "calderonlab/analysis.hpp"
#include "calderonlab/correction.hpp"
#include "calderonlab/oracle.hpp"

namespace calderonlab {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::body() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c{"check", "double", "calderon", "invariants",
                                          "sweep", "ucp", "cobordism", "oracle-compare"};
  return c;
}

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::invalid_input ? 2 : 3; }

namespace {

using Clock = std::chrono::steady_clock;

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

struct Ctx {
  const RunConfig& cfg;
  const RunOptions& opts;
  RunResult& out;

  void verdict(const std::string& name, double value, const std::string& rel, double tol) {
    bool pass = false;
    if (rel == "<=") pass = value <= tol;
    else if (rel == ">=") pass = value >= tol;
    else pass = value == tol;
    out.verdicts.push_back({name, value, rel, tol, pass});
  }
  void flag(const std::string& name, bool ok) { verdict(name, ok ? 1.0 : 0.0, "==", 1.0); }
  int mode_limit() const { return opts.modes.value_or(cfg.mode_limit); }
};

std::string s(double v) { return format_number(v); }
std::string s(Index v) { return std::to_string(v); }
std::string s(int v) { return std::to_string(v); }

Json operator_block(const AssembledOperator& op) {
  const auto& g = op.spec.geometry;
  return {{"name", op.spec.name},
          {"geometry", {{"length", g.length}, {"n_theta", g.n_theta}, {"n_x", g.n_x}, {"rank", g.rank}}},
          {"boundary_morphism", op.spec.T.name()},
          {"theta_constant", op.spec.theta_constant()},
          {"x_constant", op.spec.x_constant()},
          {"mode_groups", op.groups.count()},
          {"formally_self_adjoint", op.formally_self_adjoint},
          {"self_adjoint_defect", num(op.self_adjoint_defect)},
          {"J_condition_max", num(op.J_condition_max)},
          {"ellipticity_margin", num(op.ellipticity_margin)},
          {"green_defect", num(op.green_defect_bound)}};
}

int first_mode(const AssembledOperator& op, Index g) { return op.disc.mode_number(op.groups.members[g][0]); }

CsvTable spectrum_table(const AssembledOperator& op) {
  CsvTable t{{"side", "group", "first_mode", "re", "im"}, {}};
  for (int side = 0; side < 2; ++side)
    for (Index g = 0; g < op.groups.count(); ++g) {
      const MatrixXc& B = op.blocks[g].side[side].B0;
      Eigen::ComplexEigenSolver<MatrixXc> es(B, false);
      std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
      std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      });
      for (Complex z : ev) t.rows.push_back({s(side), s(g), s(first_mode(op, g)), s(z.real()), s(z.imag())});
    }
  return t;
}

AssembledOperator assemble(const Ctx& c) {
  AssemblyOptions o;
  o.threads = c.opts.threads;
  return assemble_operator(c.cfg.spec, build_discretization(c.cfg.spec.geometry), o);
}

// -L * min |eig beta1| when beta1 is constant; the oracle decay rate of the mode angles
std::optional<double> expected_decay_slope(const OperatorSpec& spec) {
  if (!spec.beta1.x_constant() || !spec.beta1.theta_constant()) return std::nullopt;
  Eigen::ComplexEigenSolver<MatrixXc> es(spec.beta1.eval(0.0, 0.0), false);
  return -spec.geometry.length * es.eigenvalues().cwiseAbs().minCoeff();
}

Json bundle_block(const CalderonBundle& b, const Tolerances& tol) {
  return {{"compl_residual", num(b.compl_residual)}, {"compl_tol", tol.compl_tol},
          {"idem_residual", num(b.idem_residual)},   {"idem_tol", tol.idem_tol},
          {"sym_residual", num(b.sym_residual)},     {"sym_tol", tol.sym_tol},
          {"sym_applicable", b.sym_applicable},      {"kernel_residual", num(b.kernel_residual)},
          {"ker_tol", tol.ker_tol},                  {"mode_coupling", num(b.mode_coupling)},
          {"mode_coupling_tol", 1e-8}};
}

Json double_block(const DoubleOperator& d) {
  return {{"T", d.T_used},           {"positivity", d.positivity},   {"kernel_dim", d.kernel_dim},
          {"cokernel_dim", d.cokernel_dim}, {"min_gap_ratio", num(d.min_gap_ratio)},
          {"sigma_min", num(d.sigma_min)},  {"sigma_max", num(d.sigma_max)}, {"certified", d.certified}};
}

void calderon_verdicts(Ctx& c, const CalderonBundle& b) {
  const Tolerances& tol = c.cfg.tol;
  c.verdict("compl_residual", b.compl_residual, "<=", tol.compl_tol);
  c.verdict("idem_residual", b.idem_residual, "<=", tol.idem_tol);
  if (b.sym_applicable) c.verdict("sym_residual", b.sym_residual, "<=", tol.sym_tol);
  c.verdict("kernel_residual", b.kernel_residual, "<=", tol.ker_tol);
  if (c.cfg.spec.theta_constant()) c.verdict("mode_coupling", b.mode_coupling, "<=", 1e-8);
}

}  // namespace

namespace {

void cmd_check(Ctx& c) {
  const AssembledOperator op = assemble(c);
  const SlReport sl = check_ellipticity_and_sl(op, c.cfg.tol);
  c.out.report["operator"] = operator_block(op);
  c.out.report["shapiro_lopatinskii"] = {{"positivity", sl.positivity},
                                         {"sl_pass", sl.sl_pass},
                                         {"min_positivity_eigenvalue", num(sl.min_positivity_eigenvalue)},
                                         {"min_sl_sigma", num(sl.min_sl_sigma)},
                                         {"witnesses", sl.witnesses.size()}};
  c.flag("positivity", sl.positivity);
  c.flag("sl_pass", sl.sl_pass);
  c.verdict("green_defect", op.green_defect_bound, "<=", c.cfg.tol.green_tol);
  c.out.tables["spectrum.csv"] = spectrum_table(op);
  c.out.omitted["modes.csv"] = "check has no per-mode diagnostics";
}

void cmd_double(Ctx& c) {
  const AssembledOperator op = assemble(c);
  const DoubleOperator dbl = assemble_double(op, c.cfg.tol, c.opts.threads);
  const GhostSpaces gh = ghost_solutions(op, c.cfg.tol, c.opts.threads);
  c.out.report["operator"] = operator_block(op);
  Json d = double_block(dbl);
  d["ghost_dim_A"] = gh.dim_A;
  d["ghost_dim_At"] = gh.dim_At;
  d["ghost_gap_A"] = num(gh.gap_A);
  d["ghost_gap_At"] = num(gh.gap_At);
  if (dbl.kernel_dim > 0) d["kernel_ghost_angle"] = num(kernel_ghost_angle(dbl, gh));
  if (op.formally_self_adjoint) d["symmetry_defect"] = num(double_symmetry_defect(op));
  c.out.report["double"] = d;
  c.flag("positivity", dbl.positivity);
  c.verdict("kernel_dim_minus_ghost_dim", double(dbl.kernel_dim - gh.dim_A - gh.dim_At), "==", 0.0);
  c.verdict("min_gap_ratio", dbl.min_gap_ratio, ">=", c.cfg.tol.gap_ratio);
  if (dbl.kernel_dim > 0) c.verdict("kernel_ghost_angle", kernel_ghost_angle(dbl, gh), "<=", c.cfg.tol.ker_tol);

  CsvTable t{{"group", "first_mode", "sigma_min", "sigma_max", "gap_ratio", "kernel_dim"}, {}};
  for (Index g = 0; g < op.groups.count(); ++g) {
    const GroupDouble& gd = dbl.groups[g];
    const int m = first_mode(op, g);
    if (std::abs(m) > c.mode_limit()) continue;
    const Index r = gd.decision.rank;
    t.rows.push_back({s(g), s(m), s(r > 0 ? gd.singular_values(r - 1) : 0.0), s(gd.singular_values(0)),
                      s(gd.decision.gap_ratio), s(Index(gd.kernel.cols()))});
  }
  c.out.tables["modes.csv"] = t;
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

void cmd_calderon(Ctx& c) {
  const AssembledOperator op = assemble(c);
  const DoubleOperator dbl = assemble_double(op, c.cfg.tol, c.opts.threads);
  const CalderonBundle b = calderon(dbl, op, c.cfg.tol, c.opts.threads);
  c.out.report["operator"] = operator_block(op);
  c.out.report["double"] = double_block(dbl);
  c.out.report["calderon"] = bundle_block(b, c.cfg.tol);
  calderon_verdicts(c, b);

  std::optional<CorrectionReport> corr;
  try {
    corr = correction_formula_check(dbl, op, b, c.cfg.tol, c.cfg.contour, c.opts.threads);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_input) throw;
    c.out.report["correction"] = {{"skipped", e.what()}};
  }
  std::map<int, double> profile;
  if (corr) {
    Json j = {{"residual", num(corr->residual)},
              {"correction_tol", c.cfg.tol.correction_tol},
              {"resolved_mode_limit", corr->resolved_mode_limit},
              {"decay_slope", num(corr->decay_slope)},
              {"condition", num(corr->condition)},
              {"commutator_norm", num(corr->commutator_norm)},
              {"sectorial_mismatch", num(corr->sectorial_mismatch)},
              {"quad_tol", c.cfg.tol.quad_tol},
              {"quadrature_nodes", corr->quadrature_nodes}};
    c.verdict("correction_residual", corr->residual, "<=", c.cfg.tol.correction_tol);
    const auto expected = expected_decay_slope(op.spec);
    if (expected && op.disc.n_theta() / 2 > 16) {
      j["expected_slope"] = *expected;
      j["slope_rel_tol"] = 0.2;
      c.verdict("decay_slope_rel_error", std::abs(corr->decay_slope - *expected) / std::abs(*expected), "<=", 0.2);
    }
    c.out.report["correction"] = j;
    for (const auto& p : corr->profile) profile[p.mode] = p.value;
  }

  const Index blk = 2 * op.k();
  CsvTable t{{"mode", "group", "c_plus_norm", "c_minus_norm", "c_plus_minus_p_plus"}, {}};
  std::vector<std::vector<std::string>> rows;
  for (int idx = 0; idx < op.disc.n_theta(); ++idx) {
    if (op.disc.is_nyquist(idx)) continue;
    const int n = op.disc.mode_number(idx);
    if (std::abs(n) > c.mode_limit()) continue;
    const int g = op.groups.group_of[idx];
    const Index l = op.groups.local_of[idx];
    const double cp = spectral_norm(b.groups[g].C_plus.block(l * blk, l * blk, blk, blk));
    const double cm = spectral_norm(b.groups[g].C_minus.block(l * blk, l * blk, blk, blk));
    rows.push_back({s(n), s(g), s(cp), s(cm), profile.count(n) ? s(profile[n]) : ""});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return std::stoi(a[0]) < std::stoi(b[0]); });
  t.rows = rows;
  c.out.tables["modes.csv"] = t;
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

void cmd_invariants(Ctx& c) {
  const AssembledOperator op = assemble(c);
  const DoubleOperator dbl = assemble_double(op, c.cfg.tol, c.opts.threads);
  const CalderonBundle b = calderon(dbl, op, c.cfg.tol, c.opts.threads);
  const CauchySpace cs = cauchy_space_direct(op, c.cfg.tol, c.opts.threads);
  const ProjectionInvariants pi = projection_invariants(b, op, cs, c.cfg.tol);
  c.out.report["operator"] = operator_block(op);
  Json j = bundle_block(b, c.cfg.tol);
  j["direct_angle"] = num(pi.direct_angle);
  j["angle_tol"] = c.cfg.tol.angle_tol;
  j["rank_plus"] = pi.rank_plus;
  j["rank_minus"] = pi.rank_minus;
  j["cauchy_dimension"] = cs.dimension;
  j["boundary_dimension"] = cs.boundary_dimension;
  j["cauchy_gap_ratio"] = num(cs.min_gap_ratio);
  // C+ in the L^2_s operator norm; reported, not asserted
  Json sob = Json::object();
  for (double sv : {-0.5, 0.0, 0.5}) {
    double nrm = 0.0;
    for (Index g = 0; g < op.groups.count(); ++g) {
      const auto& members = op.groups.members[g];
      VectorXd w(members.size() * 2 * op.k());
      for (size_t t = 0; t < members.size(); ++t) {
        const double n = op.disc.symbol(members[t]);
        w.segment(t * 2 * op.k(), 2 * op.k()).setConstant(std::pow(1.0 + n * n, sv / 2));
      }
      nrm = std::max(nrm, spectral_norm(w.asDiagonal() * b.groups[g].C_plus * w.cwiseInverse().asDiagonal()));
    }
    sob[format_number(sv)] = num(nrm);
  }
  j["C_plus_sobolev_norms"] = sob;
  c.out.report["invariants"] = j;
  calderon_verdicts(c, b);
  c.verdict("direct_angle", pi.direct_angle, "<=", c.cfg.tol.angle_tol);
  c.verdict("cauchy_rank_plus_minus_boundary", double(pi.rank_plus + pi.rank_minus - cs.boundary_dimension), "==", 0.0);

  CsvTable t{{"group", "first_mode", "rank_plus", "direct_dim", "direct_angle"}, {}};
  for (Index g = 0; g < op.groups.count(); ++g) {
    const int m = first_mode(op, g);
    if (std::abs(m) > c.mode_limit()) continue;
    const MatrixXc qp = orthonormal_range(b.groups[g].C_plus, c.cfg.tol.rank_tol, c.cfg.tol.gap_ratio);
    t.rows.push_back({s(g), s(m), s(Index(qp.cols())), s(Index(cs.basis[g].cols())),
                      s(max_principal_angle(cs.basis[g], qp))});
  }
  c.out.tables["modes.csv"] = t;
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

void cmd_oracle(Ctx& c) {
  const AssembledOperator op = assemble(c);
  const OracleCauchySpace oracle = mode_oracle_cauchy(c.cfg.spec, op.disc, c.cfg.tol.ode_tol, c.opts.threads);
  const DoubleOperator dbl = assemble_double(op, c.cfg.tol, c.opts.threads);
  const CalderonBundle b = calderon(dbl, op, c.cfg.tol, c.opts.threads);
  const OracleComparison cmp = compare_to_oracle(b, op, oracle, c.mode_limit(), c.cfg.tol);
  c.out.report["operator"] = operator_block(op);
  Json j = {{"global_distance", num(cmp.global_distance)}, {"angle_tol", c.cfg.tol.angle_tol},
            {"mode_limit", cmp.mode_limit},                {"mode_coupling", num(cmp.mode_coupling)},
            {"aps_slope", num(cmp.aps_slope)},             {"ode_tol", c.cfg.tol.ode_tol}};
  c.verdict("oracle_distance", cmp.global_distance, "<=", c.cfg.tol.angle_tol);
  c.verdict("mode_coupling", cmp.mode_coupling, "<=", 1e-8);
  const auto expected = expected_decay_slope(op.spec);
  if (expected && op.disc.n_theta() / 2 > 16) {
    j["expected_slope"] = *expected;
    c.verdict("aps_slope_rel_error", std::abs(cmp.aps_slope - *expected) / std::abs(*expected), "<=", 0.2);
  }
  c.out.report["oracle"] = j;
  CsvTable t{{"mode", "angle", "aps_angle"}, {}};
  for (const auto& m : cmp.modes)
    if (std::abs(m.mode) <= c.mode_limit()) t.rows.push_back({s(m.mode), s(m.angle), s(m.aps_angle)});
  c.out.tables["modes.csv"] = t;
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

void cmd_cobordism(Ctx& c) {
  const AssembledOperator op = assemble(c);
  if (!op.formally_self_adjoint) throw_input("Lagrangian check requires formally self-adjoint A");
  const DoubleOperator dbl = assemble_double(op, c.cfg.tol, c.opts.threads);
  const CalderonBundle b = calderon(dbl, op, c.cfg.tol, c.opts.threads);
  const CobordismReport r = lagrangian_and_cobordism(op, b, c.cfg.tol);
  c.out.report["operator"] = operator_block(op);
  c.out.report["cobordism"] = {{"isotropy_residual", num(r.isotropy_residual)},
                               {"isotropy_tol", c.cfg.tol.isotropy_tol},
                               {"isotropy_residual_minus", num(r.isotropy_residual_minus)},
                               {"transversality_angle", num(r.transversality_angle)},
                               {"transversality_min", c.cfg.tol.transversality_min},
                               {"dim_plus", r.dim_plus},
                               {"dim_minus", r.dim_minus},
                               {"boundary_dimension", r.boundary_dimension},
                               {"T_unitary_part", r.T_unitary_part},
                               {"signature", r.signature},
                               {"side_signature", {r.side_signature[0], r.side_signature[1]}},
                               {"dim_W0", r.dim_W0},
                               {"graded", r.graded},
                               {"grading_defect", num(r.grading_defect)},
                               {"index_B_plus", r.index_B_plus},
                               {"lagrangian", r.lagrangian}};
  c.verdict("isotropy_residual", r.isotropy_residual, "<=", c.cfg.tol.isotropy_tol);
  c.verdict("transversality_angle", r.transversality_angle, ">=", c.cfg.tol.transversality_min);
  c.verdict("dim_plus_plus_minus_minus_boundary", double(r.dim_plus + r.dim_minus - r.boundary_dimension), "==", 0.0);
  c.verdict("signature", r.signature, "==", 0.0);
  if (r.graded) c.verdict("index_B_plus", r.index_B_plus, "==", 0.0);
  c.out.omitted["modes.csv"] = "cobordism diagnostics are global";
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

void cmd_ucp(Ctx& c) {
  const AssembledOperator op = assemble(c);
  CsvTable t{{"spec", "x", "d", "d_adjoint", "gap", "gap_adjoint", "conclusive"}, {}};
  auto rows = [&](const std::string& name, const UcpProfile& p) {
    for (const auto& smp : p.samples)
      t.rows.push_back({name, s(smp.x), s(smp.d), s(smp.d_adjoint), s(smp.gap), s(smp.gap_adjoint),
                        smp.conclusive ? "1" : "0"});
  };
  auto block = [&](const UcpProfile& p) {
    Json samples = Json::array();
    for (const auto& smp : p.samples)
      samples.push_back({{"x", smp.x}, {"d", smp.d}, {"d_adjoint", smp.d_adjoint}, {"gap", num(smp.gap)},
                         {"gap_adjoint", num(smp.gap_adjoint)}, {"conclusive", smp.conclusive}});
    return Json{{"inner_index", p.inner_index}, {"monotone", p.monotone}, {"conclusive", p.conclusive},
                {"gap_ratio", c.cfg.tol.gap_ratio}, {"samples", samples}};
  };
  const UcpProfile prof = ucp_defect_profile(op, c.cfg.ucp_samples, c.cfg.tol, c.opts.threads);
  rows(op.spec.name, prof);
  c.out.report["operator"] = operator_block(op);
  Json j = block(prof);
  c.flag("ucp_conclusive", prof.conclusive);
  c.flag("ucp_monotone", prof.monotone);
  c.verdict("inner_index", prof.inner_index, "==", 0.0);
  if (c.cfg.spec.theta_constant() && c.cfg.spec.x_constant()) {
    const ConstantUcpVerdict v = constant_coeff_ucp(c.cfg.spec, op.disc, c.cfg.ucp_samples);
    bool all_zero = true;
    for (const auto& smp : prof.samples) all_zero = all_zero && smp.d == 0;
    j["oracle"] = {{"verdict", v.verdict}, {"d_zero", v.d_zero}, {"matches_profile", v.d_zero == all_zero}};
    c.flag("oracle_d_zero", v.d_zero);
    c.flag("oracle_matches_profile", v.d_zero == all_zero);
  }
  if (c.cfg.ucp_suite) {
    Json suite = Json::array();
    const auto& g = c.cfg.spec.geometry;
    for (const auto& spec : ucp_perturbation_suite(g.length, g.n_theta, g.n_x)) {
      AssemblyOptions o;
      o.threads = c.opts.threads;
      const AssembledOperator sop = assemble_operator(spec, build_discretization(spec.geometry), o);
      const UcpProfile p = ucp_defect_profile(sop, c.cfg.ucp_samples, c.cfg.tol, c.opts.threads);
      rows(spec.name, p);
      Json e = block(p);
      e["name"] = spec.name;
      suite.push_back(e);
      c.flag("suite_conclusive:" + spec.name, p.conclusive);
      c.verdict("suite_inner_index:" + spec.name, p.inner_index, "==", 0.0);
    }
    j["suite"] = suite;
  }
  c.out.report["ucp"] = j;
  c.out.tables["sweep.csv"] = t;
  c.out.omitted["modes.csv"] = "ucp profile is tabulated per sample in sweep.csv";
  c.out.tables["spectrum.csv"] = spectrum_table(op);
}

SpecFamily family_from(const RunConfig& cfg) {
  const SweepConfig& sc = *cfg.sweep;
  const auto& g = cfg.spec.geometry;
  SpecFamily f;
  f.base = cfg.spec;
  if (sc.family == "custom") {
    f.parameter = sc.parameter;
    f.direction = sc.direction;
    return f;
  }
  const SpecFamily named = sc.family == "crossing" ? crossing_family(g.length, g.n_theta, g.n_x)
                                                   : zeroth_order_family(g.length, g.n_theta, g.n_x);
  if (named.direction.rank() != g.rank) throw_input("config.sweep.family: '" + sc.family + "' needs rank 1");
  f.parameter = named.parameter;
  f.direction = named.direction;
  return f;
}

void cmd_sweep(Ctx& c) {
  if (!c.cfg.sweep) throw_input("config.sweep: missing");
  const SweepConfig& sc = *c.cfg.sweep;
  const SweepReport r = continuity_sweep(family_from(c.cfg), sc.grid, sc.sobolev_s, c.cfg.tol, c.opts.threads);
  Json steps = Json::array();
  for (int i : r.jump_steps) steps.push_back(i);
  c.out.report["sweep"] = {{"family", sc.family},
                           {"parameter", r.parameter},
                           {"sobolev_s", r.sobolev_s},
                           {"points", r.points.size()},
                           {"jump", r.jump},
                           {"jump_steps", steps},
                           {"max_step_ratio", num(r.max_step_ratio)},
                           {"resolvent_ratio_min", num(r.resolvent_ratio_min)},
                           {"resolvent_ratio_max", num(r.resolvent_ratio_max)},
                           {"resolvent_stable", r.resolvent_stable},
                           {"max_C_norm", num(r.max_C_norm)}};
  if (sc.expect_jump.value_or(false)) {
    c.flag("jump_flag_raised", r.jump);
    // the crossing family moves an eigenvalue through the axis where s changes sign
    if (sc.family == "crossing") {
      int crossing = -1;
      for (size_t i = 1; i < sc.grid.size(); ++i)
        if ((sc.grid[i - 1] < 0) != (sc.grid[i] < 0)) crossing = int(i);
      c.flag("jump_at_crossing_step", r.jump_steps == std::vector<int>{crossing});
    }
  } else {
    c.flag("no_jump_flag", !r.jump);
    c.flag("step_ratio_finite", std::isfinite(r.max_step_ratio));
    c.flag("resolvent_ratio_stable", r.resolvent_stable);
  }
  c.flag("C_plus_norm_finite", std::isfinite(r.max_C_norm));

  CsvTable t{{"s", "dC", "C_norm", "d0", "d_str", "step_dC", "step_dP", "step_d0", "step_d_str", "step_ratio",
              "step_resolvent", "resolvent_ratio", "jump_C", "jump_P"},
             {}};
  for (const auto& p : r.points)
    t.rows.push_back({s(p.s), s(p.dC), s(p.C_norm), s(p.d0), s(p.d_str), s(p.step_dC), s(p.step_dP), s(p.step_d0),
                      s(p.step_d_str), s(p.step_ratio), s(p.step_resolvent), s(p.resolvent_ratio),
                      p.jump_C ? "1" : "0", p.jump_P ? "1" : "0"});
  c.out.tables["sweep.csv"] = t;
  c.out.omitted["modes.csv"] = "sweep diagnostics are per parameter value";
  c.out.omitted["spectrum.csv"] = "sweep has no single tangential operator";
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

RunResult run_command(const RunConfig& cfg, const RunOptions& opts) {
  RunResult out;
  out.command = cfg.command;
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), cfg.command) == cmds.end())
    throw_input("command: unknown '" + cfg.command + "'");
  Ctx c{cfg, opts, out};
  const auto t0 = Clock::now();
  if (cfg.command == "check") cmd_check(c);
  else if (cfg.command == "double") cmd_double(c);
  else if (cfg.command == "calderon") cmd_calderon(c);
  else if (cfg.command == "invariants") cmd_invariants(c);
  else if (cfg.command == "oracle-compare") cmd_oracle(c);
  else if (cfg.command == "cobordism") cmd_cobordism(c);
  else if (cfg.command == "ucp") cmd_ucp(c);
  else cmd_sweep(c);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  Json verdicts = Json::array();
  bool pass = true;
  for (const auto& v : out.verdicts) {
    verdicts.push_back({{"name", v.name}, {"value", num(v.value)}, {"relation", v.relation},
                        {"tolerance", num(v.tolerance)}, {"pass", v.pass}});
    pass = pass && v.pass;
  }
  Json& r = out.report;
  r["schema"] = kReportSchema;
  r["command"] = cfg.command;
  r["config"] = cfg.echo;
  r["tolerances"] = cfg.tol.as_map();
  r["threads"] = opts.threads;
  r["mode_limit"] = c.mode_limit();
  r["verdicts"] = verdicts;
  r["pass"] = pass;
  r["timing"] = {{"seconds", secs}, {"created", timestamp()}};
  out.exit_code = pass ? 0 : 1;
  return out;
}

void write_report(RunResult& result, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_input("cannot create output directory " + dir + ": " + ec.message());
  Json files = Json::object();
  for (const auto& [name, table] : result.tables) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw_input("cannot write " + (fs::path(dir) / name).string());
    f << table.body();
    files[name] = "written";
  }
  for (const auto& name : {"modes.csv", "sweep.csv", "spectrum.csv"})
    if (!result.tables.count(name)) {
      const auto it = result.omitted.find(name);
      files[name] = "omitted: " + (it != result.omitted.end() ? it->second : std::string("no data for this command"));
      fs::remove(fs::path(dir) / name, ec);
    }
  result.report["files"] = files;
  std::ofstream f(fs::path(dir) / "report.json", std::ios::binary);
  if (!f) throw_input("cannot write report.json in " + dir);
  f << result.report.dump(2) << "\n";
}

namespace {

int fail(const std::string& command, const std::string& out_dir, const std::string& kind, const std::string& what,
         int code) {
  std::cerr << "error: " << what << "\n";
  try {
    RunResult failed;
    failed.report = {{"schema", kReportSchema},
                     {"command", command},
                     {"error", {{"kind", kind}, {"message", what}}},
                     {"pass", false},
                     {"timing", {{"created", timestamp()}}}};
    write_report(failed, out_dir);
  } catch (...) {
  }
  return code;
}

}  // namespace

int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            const std::vector<std::pair<std::string, double>>& tol_overrides, const RunOptions& opts) {
  RunResult result;
  result.command = command;
  try {
    RunConfig cfg = load_run_config(config_path);
    if (!command.empty()) cfg.command = command;
    if (cfg.command.empty()) throw_input("command: missing");
    for (const auto& [k, v] : tol_overrides) {
      try {
        cfg.tol.set(k, v);
      } catch (const Error& e) {
        throw_input(std::string("--tol ") + k + ": " + e.what());
      }
    }
    result = run_command(cfg, opts);
    write_report(result, out_dir);
    for (const auto& v : result.verdicts)
      if (!v.pass)
        std::cerr << "FAIL " << v.name << " = " << format_number(v.value) << " (" << v.relation << " "
                  << format_number(v.tolerance) << ")\n";
    std::cout << command << ": " << (result.exit_code == 0 ? "pass" : "fail") << " (" << out_dir << "/report.json)\n";
    return result.exit_code;
  } catch (const Error& e) {
    const char* kinds[] = {"invalid_input", "resolution", "inconsistent"};
    return fail(command, out_dir, kinds[int(e.kind())], e.what(), exit_code_for(e));
  } catch (const Json::exception& e) {
    return fail(command, out_dir, "invalid_input", e.what(), 2);
  } catch (const std::exception& e) {
    return fail(command, out_dir, "inconsistent", e.what(), 3);
  }
}

}  // namespace calderonlab
