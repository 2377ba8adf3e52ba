#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "calderonlab/models.hpp"
#include "calderonlab/sectorial.hpp"

namespace calderonlab {

using Json = nlohmann::json;

struct SweepConfig {
  std::string family;  // zeroth_order, crossing or custom
  SweepParameter parameter = SweepParameter::C;
  CoefficientSeries direction;
  std::vector<double> grid;
  double sobolev_s = 0.0;
  std::optional<bool> expect_jump;
};

struct RunConfig {
  std::string command;
  std::string source;  // config path
  OperatorSpec spec;
  Tolerances tol;
  ContourOverrides contour;
  std::optional<SweepConfig> sweep;
  std::vector<double> ucp_samples{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75};
  bool ucp_suite = false;
  int mode_limit = 20;
  Json echo;
};

CoefficientSeries coefficient_from_json(const Json& j, Index rank, const std::string& where);
Json coefficient_to_json(const CoefficientSeries& c);

OperatorSpec operator_from_json(const Json& j, const std::string& where = "operator");
Json operator_to_json(const OperatorSpec& spec);

/// Reads and validates a run configuration; relative operator paths resolve against the config directory.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json(const Json& j, const std::string& base_dir);

}  // namespace calderonlab
