// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "calderonlab/analysis.hpp"
#include "calderonlab/correction.hpp"
#include "calderonlab/oracle.hpp"
#include "calderonlab/pipeline.hpp"
#include "calderonlab/sectorial.hpp"

using namespace calderonlab;
namespace fs = std::filesystem;

namespace {

struct Line {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Pipeline {
  AssembledOperator op;
  DoubleOperator dbl;
  CalderonBundle bundle;
  double seconds = 0.0;
};

Pipeline pipeline(const OperatorSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p;
  p.op = assemble_operator(spec, build_discretization(spec.geometry));
  p.dbl = assemble_double(p.op);
  p.bundle = calderon(p.dbl, p.op);
  p.seconds = seconds_since(t0);
  return p;
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}

Line c1(const Pipeline& cr) {
  const auto& b = cr.bundle;
  const bool ok = b.compl_residual <= 1e-8 && b.idem_residual <= 1e-8 && b.sym_applicable && b.sym_residual <= 1e-8 &&
                  cr.seconds <= 60.0;
  return {ok, "compl " + fmt(b.compl_residual) + ", idem " + fmt(b.idem_residual) + ", sym " + fmt(b.sym_residual) +
                  ", " + fmt(cr.seconds) + " s"};
}

Line c2(const Pipeline& cr, const Pipeline& dirac) {
  const auto a = compare_to_oracle(cr.bundle, cr.op, mode_oracle_cauchy(cr.op.spec, cr.op.disc), 20);
  const auto b = compare_to_oracle(dirac.bundle, dirac.op, mode_oracle_cauchy(dirac.op.spec, dirac.op.disc), 20);
  return {a.global_distance <= 1e-6 && b.global_distance <= 1e-6,
          "max angle |n|<=20: CR " + fmt(a.global_distance) + ", Dirac " + fmt(b.global_distance)};
}

Line c3(const Pipeline& cr) {
  const auto r = correction_formula_check(cr.dbl, cr.op, cr.bundle);
  const double rel = std::abs(r.decay_slope - r.expected_slope) / std::abs(r.expected_slope);
  return {r.residual <= 1e-6 && rel <= 0.2,
          "residual |n|<=" + std::to_string(r.resolved_mode_limit) + " " + fmt(r.residual) + ", slope " +
              fmt(r.decay_slope) + " vs " + fmt(r.expected_slope)};
}

Line c4(const Pipeline& cr, const Pipeline& dirac) {
  bool ok = true;
  std::string d;
  for (const Pipeline* p : {&cr, &dirac}) {
    ok = ok && p->dbl.kernel_dim == 0 && p->dbl.min_gap_ratio >= 10.0;
    d += p->op.spec.name + " ker " + std::to_string(p->dbl.kernel_dim) + " gap " + fmt(p->dbl.min_gap_ratio) + "; ";
  }
  auto dsp = dirac_spec(1.0, 32, 24);
  dsp.T.kind = MorphismKind::inverse_J_adjoint;
  const auto sum = direct_sum(cauchy_riemann_spec(1.0, 32, 24), dsp);
  const auto op = assemble_operator(sum, build_discretization(sum.geometry));
  const auto dbl = assemble_double(op);
  const auto gh = ghost_solutions(op);
  const double angle = kernel_ghost_angle(dbl, gh);
  ok = ok && dbl.kernel_dim == gh.dim_A + gh.dim_At && angle <= 1e-6 && dbl.certified;
  d += "direct sum ker " + std::to_string(dbl.kernel_dim) + " ghosts " + std::to_string(gh.dim_A + gh.dim_At) +
       " angle " + fmt(angle);
  return {ok, d};
}

Line c5(const Pipeline& dirac) {
  const auto r = lagrangian_and_cobordism(dirac.op, dirac.bundle);
  const bool ok = r.isotropy_residual <= 1e-8 && r.transversality_angle >= 1e-3 && r.signature == 0 && r.graded &&
                  r.index_B_plus == 0;
  return {ok, "isotropy " + fmt(r.isotropy_residual) + ", angle " + fmt(r.transversality_angle) + ", signature " +
                  std::to_string(r.signature) + ", ind B+ " + std::to_string(r.index_B_plus)};
}

Line c6() {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 3.0);
  const Tolerances tol;
  auto unitary = [&](Index n) {
    MatrixXc X(n, n);
    for (Index i = 0; i < n * n; ++i) X(i) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<MatrixXc> qr(X);
    return MatrixXc(qr.householderQ());
  };
  double quad = 0.0, sum = 0.0, herm = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXc T = MatrixXc::Zero(8, 8);
    for (Index i = 0; i < 8; ++i) {
      T(i, i) = Complex((trial + i) % 2 ? u(rng) : -u(rng), 3.0 * g(rng));
      for (Index j = i + 1; j < 8; ++j) T(i, j) = 0.5 * Complex(g(rng), g(rng));
    }
    const MatrixXc Q = unitary(8);
    const MatrixXc B = Q * T * Q.adjoint();
    const auto split = sectorial_projection(B, tol);
    const MatrixXc oracle = spectral_projection_oracle(B, Region::right, imaginary_threshold(B, tol));
    quad = std::max(quad, spectral_norm(split.P_plus - oracle));
    sum = std::max(sum, split.sum_residual);
  }
  for (int trial = 0; trial < 20; ++trial) {
    // imaginary eigenvalues present: the W0 block closes the sum
    MatrixXc T = MatrixXc::Zero(8, 8);
    for (Index i = 0; i < 8; ++i) {
      T(i, i) = i < 2 ? Complex(0.0, 2.0 * g(rng)) : Complex(i % 2 ? u(rng) : -u(rng), g(rng));
      for (Index j = i + 1; j < 8; ++j) T(i, j) = 0.5 * Complex(g(rng), g(rng));
    }
    const MatrixXc Q = unitary(8);
    sum = std::max(sum, sectorial_projection(Q * T * Q.adjoint(), tol).sum_residual);
  }
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd lam(8);
    for (Index i = 0; i < 8; ++i) lam(i) = (i % 2 ? 1.0 : -1.0) * u(rng);
    const MatrixXc Q = unitary(8);
    const MatrixXc H = Q * lam.cast<Complex>().asDiagonal() * Q.adjoint();
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (H + H.adjoint()));
    const VectorXd ind = (es.eigenvalues().array() > 0).cast<double>();
    const MatrixXc P = es.eigenvectors() * ind.asDiagonal() * es.eigenvectors().adjoint();
    herm = std::max(herm, spectral_norm(sectorial_projection(H, tol).P_plus - P));
  }
  return {quad <= 1e-6 && sum <= 1e-8 && herm <= 1e-10,
          "quadrature vs Schur " + fmt(quad) + ", P+ + P- + P0 - I " + fmt(sum) + ", hermitian " + fmt(herm)};
}

Line c7() {
  const auto z = continuity_sweep(zeroth_order_family(1.0, 32, 24), grid(0.0, 0.1, 11), 0.0);
  const auto c = continuity_sweep(crossing_family(1.0, 32, 24), grid(-0.45, 0.45, 10), 0.0);
  // the eigenvalue changes sign between points 4 and 5
  const bool ok = !z.jump && std::isfinite(z.max_step_ratio) && z.resolvent_stable && c.jump_steps == std::vector<int>{5};
  std::string steps;
  for (int s : c.jump_steps) steps += std::to_string(s) + " ";
  return {ok, "zeroth-order jump " + std::string(z.jump ? "yes" : "no") + ", max step ratio " + fmt(z.max_step_ratio) +
                  ", resolvent ratio " + fmt(z.resolvent_ratio_min) + ".." + fmt(z.resolvent_ratio_max) +
                  "; crossing jump at step " + steps};
}

Line c8() {
  const std::vector<double> xs = grid(0.0, 0.75, 7);
  bool ok = true;
  std::string d;
  for (const auto& spec : {cauchy_riemann_spec(1.0, 32, 24), dirac_spec(1.0, 32, 24)}) {
    const auto op = assemble_operator(spec, build_discretization(spec.geometry));
    const auto prof = ucp_defect_profile(op, xs);
    const auto v = constant_coeff_ucp(spec, op.disc, xs);
    bool zero = true;
    for (const auto& s : prof.samples) zero = zero && s.d == 0 && s.d_adjoint == 0;
    ok = ok && zero && v.d_zero && prof.conclusive;
    d += spec.name + (zero && v.d_zero ? " d=0" : " d!=0") + "; ";
  }
  int runs = 0, good = 0;
  for (const auto& spec : ucp_perturbation_suite(1.0, 32, 24)) {
    const auto op = assemble_operator(spec, build_discretization(spec.geometry));
    const auto prof = ucp_defect_profile(op, xs);
    ++runs;
    if (prof.conclusive && prof.inner_index == 0) ++good;
  }
  ok = ok && runs >= 5 && good == runs;
  return {ok, d + "suite inner_index 0 and certified in " + std::to_string(good) + "/" + std::to_string(runs)};
}

Line c9() {
  const auto a = pipeline(cauchy_riemann_spec(1.0, 16, 12));
  const auto b = pipeline(cauchy_riemann_spec(1.0, 32, 24));
  auto improves = [](double coarse, double fine) { return coarse >= 10.0 * fine; };
  const bool ok = improves(a.op.green_defect_bound, b.op.green_defect_bound) &&
                  improves(a.bundle.sym_residual, b.bundle.sym_residual) &&
                  improves(a.bundle.compl_residual, b.bundle.compl_residual) &&
                  improves(a.bundle.idem_residual, b.bundle.idem_residual);
  return {ok, "green " + fmt(a.op.green_defect_bound) + " -> " + fmt(b.op.green_defect_bound) + ", sym " +
                  fmt(a.bundle.sym_residual) + " -> " + fmt(b.bundle.sym_residual) + ", compl " +
                  fmt(a.bundle.compl_residual) + " -> " + fmt(b.bundle.compl_residual) + ", idem " +
                  fmt(a.bundle.idem_residual) + " -> " + fmt(b.bundle.idem_residual)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Line c10() {
  const fs::path root = fs::temp_directory_path() / "calderonlab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"operator": {"model": "cauchy_riemann", "geometry": {"length": 1.0, "n_theta": 32, "n_x": 24}},
  "sweep": {"family": "zeroth_order", "grid": {"start": 0.0, "stop": 0.05, "count": 6}}})";
  int files = 0;
  bool same = true;
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  for (const char* cmd : {"calderon", "sweep", "ucp"}) {
    RunOptions one, two;
    two.threads = 2;
    const fs::path a = root / (std::string(cmd) + "_a"), b = root / (std::string(cmd) + "_b");
    if (execute(cmd, cfg.string(), a.string(), {}, one) != 0 || execute(cmd, cfg.string(), b.string(), {}, two) != 0)
      same = false;
    for (const char* f : {"modes.csv", "sweep.csv", "spectrum.csv"}) {
      if (!fs::exists(a / f) && !fs::exists(b / f)) continue;
      ++files;
      same = same && fs::exists(a / f) && fs::exists(b / f) && slurp(a / f) == slurp(b / f);
    }
  }
  std::cout.rdbuf(saved);
  return {same && files > 0, std::to_string(files) + " CSV files compared across repeated runs"};
}

}  // namespace

int main() {
  std::cout << std::unitbuf;
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Line()>& f) {
    Line l;
    try {
      l = f();
    } catch (const std::exception& e) {
      l = {false, std::string("error: ") + e.what()};
    }
    if (!l.pass) ++failures;
    std::cout << (l.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << l.detail << "\n";
  };
  const Pipeline cr = pipeline(cauchy_riemann_spec(1.0, 64, 48));
  const Pipeline dirac = pipeline(dirac_spec(1.0, 64, 48));
  report(1, "Calderon identities", [&] { return c1(cr); });
  report(2, "oracle agreement", [&] { return c2(cr, dirac); });
  report(3, "correction formula", [&] { return c3(cr); });
  report(4, "invertible double", [&] { return c4(cr, dirac); });
  report(5, "cobordism", [&] { return c5(dirac); });
  report(6, "sectorial calculus", [&] { return c6(); });
  report(7, "continuity", [&] { return c7(); });
  report(8, "UCP profile", [&] { return c8(); });
  report(9, "convergence", [&] { return c9(); });
  report(10, "determinism", [&] { return c10(); });
  return failures;
}
