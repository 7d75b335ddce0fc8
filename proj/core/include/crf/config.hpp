#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crf/errors.hpp"
#include "crf/grid.hpp"
#include "crf/perturbation.hpp"

namespace crf {

/// Parse or validation failure. `line` is 0 for rule violations that are not
/// tied to one line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class RunMode { Crf, Dcrf, BothCompare };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

struct FlowConfig {
  // [geometry]
  Family family = Family::AhBall;
  int m = 3;
  int kappa = 1;
  /// Einstein constant of closed runs; the AH ball always uses -m/2.
  double c = -1.0;
  /// Admits closed runs with c >= 0, where the pressure operator can be singular.
  bool allow_positive_c = false;

  // [grid]
  double s_max = 8.0;
  double length = 3.141592653589793;
  std::size_t n_points = 401;

  // [time]
  double t_end = 0.1;
  double cfl_sigma = 0.2;
  double snapshot_interval = 0.01;

  // [flow]
  RunMode mode = RunMode::Crf;
  bool normalize = true;

  // [perturbation]
  Perturbation perturbation;

  // [tolerances]
  double elliptic = 1e-9;
  double newton = 1e-10;
  double drift_band = 1e-4;
  double evolution = 1e-10;
  double gauge = 1e-3;
  double alpha = 0.1;

  // [output]
  std::string directory = "crf_out";
  bool write_json = true;
  bool write_csv = true;
  bool write_snapshots = true;

  // [scenario]
  /// Refinement ladder of n_points values; empty for a single run.
  std::vector<std::size_t> ladder;

  /// s_max on the ball, L on closed families.
  double extent() const { return family == Family::AhBall ? s_max : length; }

  bool operator==(const FlowConfig&) const = default;
};

/// Parses the line-oriented `key = value` format with `[section]` headers.
/// Values are numbers, booleans, double-quoted strings, or flat arrays of
/// those. Unknown sections and keys, duplicates and malformed lines are
/// errors carrying the line number; validation failures name the rule.
FlowConfig parse_config(std::string_view text);

/// Reads and parses a file.
FlowConfig load_config(const std::string& path);

/// Checks the invariants of a config; parse_config calls this.
void validate_config(const FlowConfig& config);

/// Every key with its resolved value, in a form parse_config accepts and that
/// re-parses to an equal config.
std::string echo_config(const FlowConfig& config);

}  // namespace crf
