#include "calderonlab/models.hpp"

namespace calderonlab {

MatrixXc pauli(int which) {
  MatrixXc m = MatrixXc::Zero(2, 2);
  switch (which) {
    case 1: m << 0.0, 1.0, 1.0, 0.0; break;
    case 2: m << 0.0, -kI, kI, 0.0; break;
    case 3: m << 1.0, 0.0, 0.0, -1.0; break;
    default: m.setIdentity();
  }
  return m;
}

OperatorSpec cauchy_riemann_spec(double length, int n_theta, int n_x) {
  OperatorSpec s;
  s.name = "cauchy_riemann";
  s.geometry = {length, n_theta, n_x, 1};
  s.J = CoefficientSeries::constant(MatrixXc::Identity(1, 1));
  s.beta1 = CoefficientSeries::constant(MatrixXc::Constant(1, 1, kI));
  s.beta0 = CoefficientSeries::zero(1);
  s.C = CoefficientSeries::zero(1);
  s.T.kind = MorphismKind::inverse_J_adjoint;
  return s;
}

OperatorSpec dirac_spec(double length, int n_theta, int n_x) {
  OperatorSpec s;
  s.name = "dirac_sigma1";
  s.geometry = {length, n_theta, n_x, 2};
  MatrixXc J(2, 2);
  J << 0.0, 1.0, -1.0, 0.0;
  s.J = CoefficientSeries::constant(J);
  s.beta1 = CoefficientSeries::constant(-kI * pauli(1));
  s.beta0 = CoefficientSeries::zero(2);
  s.C = CoefficientSeries::zero(2);
  s.T.kind = MorphismKind::J_unitary_part;
  return s;
}

namespace {
CoefficientSeries block_sum(const CoefficientSeries& a, const CoefficientSeries& b) {
  const Index ka = a.rank(), kb = b.rank();
  const int P = std::max(a.P(), b.P()), M = std::max(a.M_max(), b.M_max());
  CoefficientSeries out(ka + kb, P, M);
  for (int p = 0; p <= a.P(); ++p)
    for (int m = -a.M_max(); m <= a.M_max(); ++m) out.term(p, m).topLeftCorner(ka, ka) = a.term(p, m);
  for (int p = 0; p <= b.P(); ++p)
    for (int m = -b.M_max(); m <= b.M_max(); ++m) out.term(p, m).bottomRightCorner(kb, kb) = b.term(p, m);
  return out;
}
}  // namespace

OperatorSpec direct_sum(const OperatorSpec& a, const OperatorSpec& b) {
  GeometryConfig ga = a.geometry, gb = b.geometry;
  ga.rank = gb.rank = 1;
  if (!(ga == gb)) throw_input("direct sum needs matching geometry");
  if (a.T.kind != b.T.kind) throw_input("direct sum needs the same boundary morphism kind");
  OperatorSpec s;
  s.name = a.name + "+" + b.name;
  s.geometry = a.geometry;
  s.geometry.rank = a.geometry.rank + b.geometry.rank;
  s.J = block_sum(a.J, b.J);
  s.beta1 = block_sum(a.beta1, b.beta1);
  s.beta0 = block_sum(a.beta0, b.beta0);
  s.C = block_sum(a.C, b.C);
  s.T.kind = a.T.kind;
  if (a.T.kind == MorphismKind::explicit_matrix)
    for (int side = 0; side < 2; ++side) s.T.explicit_T[side] = block_sum(a.T.explicit_T[side], b.T.explicit_T[side]);
  return s;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "J") return SweepParameter::J;
  if (name == "beta1") return SweepParameter::beta1;
  if (name == "beta0") return SweepParameter::beta0;
  if (name == "C") return SweepParameter::C;
  throw_input("unknown sweep parameter '" + name + "'");
}

std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::J: return "J";
    case SweepParameter::beta1: return "beta1";
    case SweepParameter::beta0: return "beta0";
    case SweepParameter::C: return "C";
  }
  return "";
}

OperatorSpec SpecFamily::operator()(double s) const {
  OperatorSpec out = base;
  const CoefficientSeries step = direction * Complex(s);
  switch (parameter) {
    case SweepParameter::J: out.J = base.J + step; break;
    case SweepParameter::beta1: out.beta1 = base.beta1 + step; break;
    case SweepParameter::beta0: out.beta0 = base.beta0 + step; break;
    case SweepParameter::C: out.C = base.C + step; break;
  }
  return out;
}

SpecFamily zeroth_order_family(double length, int n_theta, int n_x) {
  SpecFamily f;
  f.base = cauchy_riemann_spec(length, n_theta, n_x);
  f.parameter = SweepParameter::C;
  f.direction = CoefficientSeries(1, 1, 0);
  f.direction.term(0, 0)(0, 0) = Complex(0.5, 0.2);
  f.direction.term(1, 0)(0, 0) = Complex(0.3, 0.0);
  return f;
}

SpecFamily crossing_family(double length, int n_theta, int n_x) {
  SpecFamily f;
  f.base = cauchy_riemann_spec(length, n_theta, n_x);
  f.parameter = SweepParameter::beta0;
  f.direction = CoefficientSeries::constant(MatrixXc::Identity(1, 1));
  return f;
}

std::vector<OperatorSpec> ucp_perturbation_suite(double length, int n_theta, int n_x) {
  std::vector<OperatorSpec> out;
  const OperatorSpec base = cauchy_riemann_spec(length, n_theta, n_x);
  auto with_C = [&](const std::string& name, const CoefficientSeries& C) {
    OperatorSpec s = base;
    s.name = name;
    s.C = C;
    out.push_back(s);
  };
  with_C("cr_plus_constant", CoefficientSeries::constant(MatrixXc::Constant(1, 1, Complex(0.7, -0.4))));
  CoefficientSeries linear(1, 2, 0);
  linear.term(0, 0)(0, 0) = 0.2;
  linear.term(1, 0)(0, 0) = Complex(-1.1, 0.5);
  linear.term(2, 0)(0, 0) = 0.6;
  with_C("cr_plus_quadratic_x", linear);
  CoefficientSeries large = CoefficientSeries::constant(MatrixXc::Constant(1, 1, Complex(3.0, 2.0)));
  with_C("cr_plus_large_constant", large);
  CoefficientSeries cosine(1, 0, 1);
  cosine.term(0, 1)(0, 0) = 0.4;
  cosine.term(0, -1)(0, 0) = 0.4;
  with_C("cr_plus_cos_theta", cosine);
  CoefficientSeries mixed(1, 1, 2);
  mixed.term(0, 2)(0, 0) = Complex(0.3, 0.1);
  mixed.term(1, -2)(0, 0) = Complex(-0.5, 0.0);
  mixed.term(1, 0)(0, 0) = 0.25;
  with_C("cr_plus_mixed", mixed);
  return out;
}

}  // namespace calderonlab
