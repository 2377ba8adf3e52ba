#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calderonlab/config_io.hpp"

namespace calderonlab {

inline const char* kReportSchema = "calderonlab.report/1";

struct Verdict {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "=="
  double tolerance = 0.0;
  bool pass = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string body() const;
};

struct RunOptions {
  int threads = 1;
  std::optional<int> modes;  // caps |n| in per-mode tables and oracle comparisons
};

struct RunResult {
  std::string command;
  Json report;
  std::map<std::string, CsvTable> tables;     // modes.csv, sweep.csv, spectrum.csv
  std::map<std::string, std::string> omitted; // file -> reason
  std::vector<Verdict> verdicts;
  int exit_code = 0;
};

const std::vector<std::string>& known_commands();

/// %.17g
std::string format_number(double v);

RunResult run_command(const RunConfig& cfg, const RunOptions& opts = {});

/// report.json plus every table; notes omitted tables in the report.
void write_report(RunResult& result, const std::string& dir);

/// 2 for invalid input, 3 for resolution or inconsistency.
int exit_code_for(const Error& e);

/// Loads, runs and writes; any failure still leaves a report.json when the directory is writable.
int execute(const std::string& command, const std::string& config_path, const std::string& out_dir,
            const std::vector<std::pair<std::string, double>>& tol_overrides, const RunOptions& opts);

}  // namespace calderonlab
