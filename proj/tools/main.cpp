#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "eventgrad/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized SGD simulator with event-triggered communication"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "Path to the JSON config")->required();
    if (with_out) cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Override the config seed");
  };

  auto* run_cmd = app.add_subcommand("run", "Execute one experiment");
  add_common(run_cmd, true);
  auto* compare_cmd =
      app.add_subcommand("compare", "Run regular and event-triggered arms and compare");
  add_common(compare_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  add_common(sweep_cmd, true);
  auto* bound_cmd = app.add_subcommand("bound", "Print the convergence-bound report");
  add_common(bound_cmd, false);

  CLI11_PARSE(app, argc, argv);

  using namespace eventgrad::cli;
  if (run_cmd->parsed()) return cmd_run(config_path, out_dir, seed, std::cout, std::cerr);
  if (compare_cmd->parsed())
    return cmd_compare(config_path, out_dir, seed, std::cout, std::cerr);
  if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_dir, seed, std::cout, std::cerr);
  if (bound_cmd->parsed()) return cmd_bound(config_path, std::cout, std::cerr);
  return 1;
}
