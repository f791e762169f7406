#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace eventgrad::cli {

/// Exit codes shared by all subcommands: 0 success, 1 runtime failure,
/// 2 bad config.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitBadConfig = 2;

/// Executes one experiment; writes <out>/metrics.csv and <out>/meta.json.
int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& out,
            std::ostream& err);

/// Runs both arms of an eventgrad config; writes per-arm metrics under
/// <out>/regular and <out>/event plus <out>/report.json.
int cmd_compare(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override, std::ostream& out,
                std::ostream& err);

/// Runs every grid point (EVENTGRAD_THREADS caps parallelism); writes
/// <out>/sweep.csv and per-point metrics under <out>/points/<idx>/.
int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override, std::ostream& out,
              std::ostream& err);

/// Prints the convergence-bound report as JSON to `out`.
int cmd_bound(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace eventgrad::cli
