#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "odmarl/env.hpp"
#include "odmarl/qtable.hpp"

namespace odmarl {

struct EvalReport {
  double mean_return = 0.0;  // undiscounted episode sum
  double std_return = 0.0;
  int n_episodes = 0;
  std::map<std::string, double> metrics;
};

/// Runs full episodes with all agents acting their (deterministic) policies
/// simultaneously. Per-episode rng streams are derived from the seed, so the
/// report is bit-reproducible.
EvalReport evaluate_joint(const EnvSpec& env,
                          const std::vector<std::vector<int>>& policies,
                          int n_episodes, std::uint64_t seed);

/// Mean over the sampled states of max_i V_i(s) - min_i V_i(s).
double value_consensus(const std::vector<QTable>& tables, const std::vector<int>& states);

/// Uniform sample without replacement of min(max_count, n_states) states.
std::vector<int> sample_states(int n_states, int max_count, std::uint64_t seed);

/// Absolute gap between the agents' mean greedy Q at the start state and the
/// mean discounted Monte Carlo return of the executed joint policy, averaged
/// over start states.
double extrapolation_error(const EnvSpec& env,
                           const std::vector<std::vector<int>>& policies,
                           const std::vector<QTable>& tables, int n_episodes,
                           std::uint64_t seed, double gamma);

/// Layered episodic scaffold (every trajectory reaches one of two terminals)
/// used by the shared-transition consistency harness.
EnvSpec make_episodic_template(int n_states, int n_actions, int n_agents,
                               std::uint64_t seed);

/// Builds per-agent models over the template's states in which every agent's
/// greedy action carries the same next-state distribution (other actions are
/// arbitrary), runs exact value iteration per agent, and returns the largest
/// cross-agent spread of state values. With mismatched = true the greedy-row
/// distributions are deliberately tilted apart per agent, as a negative
/// control. Alignment of greedy actions is iterated to a fixed point; failure
/// to align throws.
double proposition1_check(const EnvSpec& env_template, int n_agents,
                          std::uint64_t seed, bool mismatched = false);

/// Appends (run id, metric, value) CSV rows.
void append_eval_csv(std::ostream& out, const std::string& run_id, const EvalReport& report);

}  // namespace odmarl
