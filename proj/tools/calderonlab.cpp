#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calderonlab/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"calderonlab: Calderon projections and invertible doubles on a cylinder"};
  std::string command, config, out = "./out";
  std::vector<std::string> tols;
  int modes = -1, threads = 0;

  app.add_option("command", command, "check | double | calderon | invariants | sweep | ucp | cobordism | oracle-compare")
      ->required()
      ->check(CLI::IsMember(calderonlab::known_commands()));
  app.add_option("--config", config, "run configuration (JSON)")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--tol", tols, "tolerance override KEY=VALUE (repeatable)");
  app.add_option("--modes", modes, "largest |n| in per-mode tables and oracle comparisons")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads (default: CALDERONLAB_THREADS or 1)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  calderonlab::RunOptions opts;
  opts.threads = 1;
  if (threads > 0) {
    opts.threads = threads;
  } else if (const char* env = std::getenv("CALDERONLAB_THREADS")) {
    try {
      opts.threads = std::max(1, std::stoi(env));
    } catch (...) {
      std::cerr << "error: CALDERONLAB_THREADS must be an integer\n";
      return 2;
    }
  }
  if (modes >= 0) opts.modes = modes;

  std::vector<std::pair<std::string, double>> overrides;
  for (const auto& t : tols) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --tol expects KEY=VALUE, got '" << t << "'\n";
      return 2;
    }
    try {
      size_t used = 0;
      const std::string v = t.substr(eq + 1);
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      overrides.emplace_back(t.substr(0, eq), x);
    } catch (const std::exception&) {
      std::cerr << "error: --tol " << t.substr(0, eq) << ": not a number\n";
      return 2;
    }
  }
  return calderonlab::execute(command, config, out, overrides, opts);
}
