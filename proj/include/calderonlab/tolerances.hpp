#pragma once

#include <map>
#include <string>

namespace calderonlab {

/// Every threshold the pipeline tests against. Reports echo the value used
/// next to each residual.
struct Tolerances {
  double rank_tol = 1e-10;        // relative singular-value cut
  double gap_ratio = 10.0;        // minimum ratio certifying a rank decision
  double idem_tol = 1e-8;
  double compl_tol = 1e-8;
  double sym_tol = 1e-8;
  double ker_tol = 1e-6;
  double quad_tol = 1e-8;
  double imag_tol_rel = 1e-9;     // |Re lambda| <= imag_tol_rel * ||B|| counts as imaginary
  double angle_tol = 1e-6;
  double isotropy_tol = 1e-8;
  double transversality_min = 1e-3;
  double correction_tol = 1e-6;
  double ode_tol = 1e-12;
  double green_tol = 1e-8;

  /// Applies a KEY=VALUE override; throws on unknown keys.
  void set(const std::string& key, double value);
  std::map<std::string, double> as_map() const;
};

}  // namespace calderonlab
