#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "odmarl/commands.hpp"
#include "odmarl/error.hpp"

namespace {

odmarl::RunConfig load_config(const std::string& path,
                              std::optional<std::uint64_t> seed_override,
                              const std::string& out_override) {
  if (path.empty())
    throw odmarl::ValidationError("this subcommand requires --config PATH");
  odmarl::RunConfig config = odmarl::parse_config(path);
  if (seed_override) {
    config.seed = *seed_override;
    config.run_id = "run" + std::to_string(config.seed);
  }
  if (!out_override.empty()) {
    if (config.dataset_dir == config.out_dir) config.dataset_dir = out_override;
    config.out_dir = out_override;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline decentralized multi-agent RL laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;
  app.add_option("--config", config_path, "path to the run configuration file");
  auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
  app.add_option("--out", out_override, "override the output directory");

  auto* collect_cmd = app.add_subcommand("collect", "roll out behavior policies into per-agent JSONL datasets");
  auto* train_cmd = app.add_subcommand("train", "fit per-agent Q tables from the datasets");
  auto* eval_cmd = app.add_subcommand("eval", "execute the greedy joint policy and write metrics");
  auto* tables_cmd = app.add_subcommand("reproduce-tables", "recompute the bundled matrix-game reference tables");
  auto* verify_cmd = app.add_subcommand("verify", "run a property-verification suite");
  std::string suite;
  verify_cmd->add_option("suite", suite, "one of: contraction, proposition1, td-equivalence, affine-invariance, dg-improvement")
      ->required();
  auto* inspect_cmd = app.add_subcommand("inspect", "print the weighted support of one (agent, state, action)");
  int inspect_agent = 0, inspect_state = 0, inspect_action = 0;
  inspect_cmd->add_option("--agent", inspect_agent, "agent index (0-based)")->required();
  inspect_cmd->add_option("--state", inspect_state, "state id")->required();
  inspect_cmd->add_option("--action", inspect_action, "own-action id")->required();

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) seed_override = seed_value;

  return odmarl::run_command(
      [&]() -> int {
        if (tables_cmd->parsed()) return odmarl::cmd_reproduce_tables(std::cout);
        if (verify_cmd->parsed()) return odmarl::cmd_verify(suite, std::cout);
        const odmarl::RunConfig config =
            load_config(config_path, seed_override, out_override);
        if (collect_cmd->parsed()) return odmarl::cmd_collect(config, std::cout);
        if (train_cmd->parsed()) return odmarl::cmd_train(config, std::cout);
        if (eval_cmd->parsed()) return odmarl::cmd_eval(config, std::cout);
        if (inspect_cmd->parsed())
          return odmarl::cmd_inspect(config, inspect_agent, inspect_state,
                                     inspect_action, std::cout);
        throw odmarl::ValidationError("no subcommand given");
      },
      std::cerr);
}
