#pragma once

#include "cli/config.hpp"
#include "cli/table.hpp"
#include "pspin/model.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace pspin::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      ///< check failed, sweep points failed, or unexpected error
  kExitConfig = 2,       ///< unknown key, bad value, bad flag
  kExitDomain = 3,       ///< parameters outside the model's domain
  kExitNumerical = 4,    ///< convergence, integration or fit failure
};

/// Maps an exception to its exit code and writes "error[<kind>]: <message>".
int report_error(const std::exception& e, std::ostream& err);

enum class Format { csv, json };

struct Options {
  Config config;
  std::optional<std::filesystem::path> out_dir;  ///< unset: write to stdout (sweep uses ".")
  int jobs = 0;                                  ///< 0: hardware concurrency
  Format format = Format::csv;
  std::optional<long long> limit;                ///< sweep: stop after this many new points
};

/// One annealing run.
struct RunPoint {
  std::string mode;  ///< qa-rt, qa-it or sa
  ModelParams params;
  double start = 0.0;
  double end = 0.0;
  double tau = 1.0;
};

struct RunResult {
  double eps_res = 0.0;
  double m_mean = 0.0;
  double m2_mean = 0.0;
  double drift = 0.0;  ///< norm or probability drift before renormalization
  long long steps = 0;
  double wall_time_s = 0.0;
};

/// Integrates one point with the integrator settings of `config`.
RunResult run_point(const RunPoint& point, const Config& config);

/// Column names shared by anneal and sweep output.
const std::vector<std::string>& record_columns();
std::vector<Cell> record_row(const RunPoint& point, const RunResult& r, const std::string& status);

/// Metadata block common to all outputs: tool, version, command, config hash and config lines.
std::vector<std::string> output_meta(const std::string& command, const Config& config);

int cmd_anneal(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_spectrum(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_envelope(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const Options& opt, std::ostream& out, std::ostream& err);

}  // namespace pspin::cli
