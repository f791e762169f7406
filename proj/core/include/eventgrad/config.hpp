#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eventgrad/analysis.hpp"
#include "eventgrad/engine.hpp"

namespace eventgrad {

/// Schema or parse failure; maps to exit code 2 at the CLI. The message
/// carries the config path and the offending key or byte offset.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and schema-validates a JSON run config. Unknown keys are
/// rejected; required fields: n, seed, algorithm, gamma, iterations,
/// objective.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin);

/// Canonical JSON echo of a config (stored in meta.json; re-parses to an
/// equivalent config).
std::string run_config_to_json(const RunConfig& config);

/// Parameter grid for `sweep`; lists left empty fall back to the base
/// config's value. At least one list must be nonempty.
struct SweepGrid {
  std::vector<double> horizon;
  std::vector<double> topk_percent;
  std::vector<int> n;
  std::vector<double> gamma;
};

struct SweepConfig {
  RunConfig base;
  SweepGrid grid;
};

SweepConfig load_sweep_config(const std::string& path);

/// Inputs for the `bound` report. gamma left unset means the corollary
/// step-size rule; constants may be filled from an objective estimate.
struct BoundConfig {
  int iterations = 1;
  int n = 1;
  ThresholdSchedule schedule;
  std::optional<double> gamma;
  std::optional<double> L, sigma, varsigma, rho, f0_minus_fstar;
  std::optional<ObjectiveConfig> estimate_objective;
  int estimate_samples = 3;
  std::uint64_t seed = 0;
  std::optional<double> fstar_override;
};

BoundConfig load_bound_config(const std::string& path);

}  // namespace eventgrad
