#include <filesystem>
#include <fstream>
#include <sstream>

#include "calderonlab/pipeline.hpp"
#include "doctest.h"

using namespace calderonlab;
namespace fs = std::filesystem;

namespace {
const std::string kConfigs = CALDERONLAB_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("calderonlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

Json report(const fs::path& dir) { return Json::parse(slurp(dir / "report.json")); }

const char* kSmallCr =
    R"({"operator": {"model": "cauchy_riemann", "geometry": {"length": 1.0, "n_theta": 16, "n_x": 20}}})";
}  // namespace

TEST_CASE("calderon on the bundled CR config") {
  const fs::path out = scratch("cr");
  CHECK(execute("calderon", kConfigs + "/cr.json", out.string(), {}, {}) == 0);
  const Json r = report(out);
  CHECK(r["schema"] == kReportSchema);
  CHECK(r["calderon"]["compl_residual"].get<double>() <= 1e-8);
  CHECK(r["pass"] == true);
  for (const auto& v : r["verdicts"]) CHECK(v.contains("tolerance"));
  CHECK(fs::exists(out / "modes.csv"));
  CHECK(Json::parse(r.dump()) == r);
}

TEST_CASE("configuration errors exit with 2 and name the key") {
  const fs::path dir = scratch("bad");
  const fs::path out = dir / "out";
  auto cfg = write_config(dir, R"({"operator": {"model": "cauchy_riemann", "geometry": {"length": 1.0, "n_theta": "x", "n_x": 12}}})");
  CHECK(execute("check", cfg.string(), out.string(), {}, {}) == 2);
  CHECK(report(out)["error"]["message"].get<std::string>().find("operator.geometry.n_theta") != std::string::npos);

  cfg = write_config(dir, R"({"operator": {"model": "cauchy_riemann", "geometry": {"length": 1.0, "n_theta": 16, "n_x": 12}}, "tolerances": {"bogus": 1}})");
  CHECK(execute("check", cfg.string(), out.string(), {}, {}) == 2);
  CHECK(report(out)["error"]["message"].get<std::string>().find("config.tolerances.bogus") != std::string::npos);

  cfg = write_config(dir, "{\"operator\": ");
  CHECK(execute("check", cfg.string(), out.string(), {}, {}) == 2);
  CHECK(report(out)["error"]["message"].get<std::string>().find("malformed JSON") != std::string::npos);

  cfg = write_config(dir, kSmallCr);
  CHECK(execute("check", cfg.string(), out.string(), {{"nope", 1.0}}, {}) == 2);
  CHECK(execute("cobordism", cfg.string(), out.string(), {}, {}) == 2);
  CHECK(report(out)["error"]["message"].get<std::string>().find("requires formally self-adjoint A") != std::string::npos);
  CHECK(execute("sweep", cfg.string(), out.string(), {}, {}) == 2);
}

TEST_CASE("verdict failures exit with 1") {
  const fs::path dir = scratch("fail");
  const auto cfg = write_config(dir, kSmallCr);
  CHECK(execute("calderon", cfg.string(), (dir / "out").string(), {{"correction_tol", 1e-20}}, {}) == 1);
  CHECK(report(dir / "out")["pass"] == false);
}

TEST_CASE("identical runs give identical tables") {
  const fs::path dir = scratch("det");
  const auto cfg = write_config(dir, kSmallCr);
  RunOptions two;
  two.threads = 2;
  REQUIRE(execute("calderon", cfg.string(), (dir / "a").string(), {}, {}) == 0);
  REQUIRE(execute("calderon", cfg.string(), (dir / "b").string(), {}, two) == 0);
  for (const char* f : {"modes.csv", "spectrum.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(!slurp(dir / "a" / "modes.csv").empty());
  const Json r = report(dir / "a");
  CHECK(r["files"]["sweep.csv"].get<std::string>().rfind("omitted", 0) == 0);
  CHECK(!fs::exists(dir / "a" / "sweep.csv"));
}

TEST_CASE("sweep table has one row per point") {
  const fs::path dir = scratch("sweep");
  const auto cfg = write_config(dir, R"({"operator": {"model": "cauchy_riemann", "geometry": {"length": 1.0, "n_theta": 16, "n_x": 12}},
    "sweep": {"family": "zeroth_order", "grid": {"start": 0.0, "stop": 0.1, "count": 11}}})");
  CHECK(execute("sweep", cfg.string(), (dir / "out").string(), {}, {}) == 0);
  const std::string body = slurp(dir / "out" / "sweep.csv");
  CHECK(std::count(body.begin(), body.end(), '\n') == 12);
}

TEST_CASE("operator json round trip") {
  const Json j = Json::parse(slurp(kConfigs + "/cr_operator.json"));
  const OperatorSpec spec = operator_from_json(j);
  const OperatorSpec again = operator_from_json(operator_to_json(spec));
  CHECK(again.J == spec.J);
  CHECK(again.beta1 == spec.beta1);
  CHECK(again.T.kind == spec.T.kind);
  CHECK(again.geometry.n_x == 48);
}
