#include "calderonlab/tolerances.hpp"

#include "calderonlab/types.hpp"

namespace calderonlab {

namespace {
template <typename Fn>
void for_each_field(Tolerances& t, Fn&& fn) {
  fn("rank_tol", t.rank_tol);
  fn("gap_ratio", t.gap_ratio);
  fn("idem_tol", t.idem_tol);
  fn("compl_tol", t.compl_tol);
  fn("sym_tol", t.sym_tol);
  fn("ker_tol", t.ker_tol);
  fn("quad_tol", t.quad_tol);
  fn("imag_tol", t.imag_tol_rel);
  fn("angle_tol", t.angle_tol);
  fn("isotropy_tol", t.isotropy_tol);
  fn("transversality_min", t.transversality_min);
  fn("correction_tol", t.correction_tol);
  fn("ode_tol", t.ode_tol);
  fn("green_tol", t.green_tol);
}
}  // namespace

void Tolerances::set(const std::string& key, double value) {
  bool found = false;
  for_each_field(*this, [&](const char* name, double& field) {
    if (key == name) {
      field = value;
      found = true;
    }
  });
  if (!found) throw_input("unknown tolerance key '" + key + "'");
  if (!(value > 0.0)) throw_input("tolerance '" + key + "' must be positive");
}

std::map<std::string, double> Tolerances::as_map() const {
  std::map<std::string, double> out;
  Tolerances copy = *this;
  for_each_field(copy, [&](const char* name, double& field) { out[name] = field; });
  return out;
}

}  // namespace calderonlab
