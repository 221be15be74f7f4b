#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odmarl/learner.hpp"

namespace odmarl {

// Parsed form of the INI-style run configuration. Every knob that a table or
// suite depends on is surfaced here; defaults match the documented schema.
struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
  std::string run_id;  // defaults to "run<seed>"

  // [env]
  std::string env_name;
  int pos_bins = 21;
  int act_bins = 5;
  int dg_horizon = 25;
  int n_states = 4;
  int n_actions = 2;
  int n_agents = 2;
  double r_min = 1.0;
  double r_max = 5.0;
  std::optional<int> env_horizon;

  // [behavior]
  std::string behavior_kind = "uniform";  // "uniform" | "explicit"
  std::vector<std::vector<double>> behavior_probs;  // per agent, explicit kind

  // [dataset]
  int episodes = 100000;
  std::string dataset_dir;  // defaults to out_dir
  double reward_tol = 1e-9;

  // [learn]
  std::string algo = "vi";  // "vi" | "td"
  LearnConfig learn;
  std::optional<double> rescale_min;
  std::optional<double> rescale_max;

  // [eval]
  int eval_episodes = 1000;

  std::string dataset_path(int agent) const;
  std::string qtable_path(int agent) const;
  std::string train_log_path(int agent) const;
  std::string env_path() const;
  std::string results_path() const;
};

/// Parses the documented key-value schema. Unknown sections or keys and
/// missing required fields raise ValidationError naming the field.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Builds the configured environment (deterministic; random envs derive
/// their construction seed from the run seed).
EnvSpec build_env(const RunConfig& config);

/// Builds the configured behavior policy for the environment.
JointPolicy build_behavior(const RunConfig& config, const EnvSpec& env);

}  // namespace odmarl
