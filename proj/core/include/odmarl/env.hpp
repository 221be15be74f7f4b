#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "odmarl/rng.hpp"

namespace odmarl {

/// Sparse categorical row over state ids: (state, probability), sorted by id.
using SparseRow = std::vector<std::pair<int, double>>;

/// A finite multi-agent MDP. The reward is a function of the state being
/// entered; terminal states have no outgoing transitions. Immutable after
/// construction and safe to share across threads.
struct EnvSpec {
  std::string name;
  int n_agents = 0;
  int n_states = 0;
  std::vector<int> actions_per_agent;
  /// transition[s][joint] is the next-state distribution; terminal states
  /// carry an empty outer vector.
  std::vector<std::vector<SparseRow>> transition;
  /// Reward received upon entering each state.
  std::vector<double> reward;
  std::vector<char> terminal;
  std::optional<int> horizon;
  /// Initial state distribution used by episode rollouts.
  SparseRow initial;

  int n_joint_actions() const;
  /// Mixed-radix joint index with agent 0 least significant.
  int joint_index(std::span<const int> actions) const;
  std::vector<int> decode_joint(int joint) const;
  bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }

  /// Throws ValidationError unless every distribution sums to 1 within 1e-12
  /// with nonnegative entries, terminals have no outgoing rows, and all ids
  /// are in range.
  void validate() const;
};

/// Per-agent, per-state action distributions (behavior policies live here).
struct JointPolicy {
  /// probs[agent][state] is that agent's action distribution at the state.
  std::vector<std::vector<std::vector<double>>> probs;

  void validate(const EnvSpec& env) const;
};

/// The two-player one-step game: state 0 is the decision state; states 1, 2,
/// and 3 are terminal outcomes entered with rewards 1, 5, and 6. Both joint
/// actions that pay 1 lead to the same terminal.
EnvSpec matrix_game();

/// Shared reward of the two-position differential game, with l the distance
/// of (x1, x2) from the origin:
///   0.5*(cos(15 l) + 1)  for l < 0.2
///   0                    for 0.2 <= l <= 0.6
///   0.5*(l - 0.6)^2      for l > 0.6
/// Inputs outside [-1, 1] are rejected.
double dg_reward(double x1, double x2);

/// Tabular differential game: two agents on [-1, 1], positions binned to
/// pos_bins grid points (odd, so 0 is a grid point), speeds binned to
/// act_bins values in [-0.1, 0.1]. Position updates clamp to the range and
/// snap to the nearest bin, ties toward the higher bin. Episodes end at the
/// horizon; there are no terminal states.
EnvSpec discretized_dg(int pos_bins, int act_bins, int horizon);

/// Seeded random MDP: each (state, joint action) row drawn from a symmetric
/// Dirichlet(1), state rewards uniform in [r_min, r_max] (r_min must be
/// positive), no terminal states, uniform initial distribution.
EnvSpec random_mdp(int n_states, int n_actions_per_agent, int n_agents,
                   double r_min, double r_max, std::uint64_t seed,
                   std::optional<int> horizon = std::nullopt);

/// Uniform behavior for every agent at every state.
JointPolicy uniform_policy(const EnvSpec& env);
/// State-independent behavior: one action distribution per agent.
JointPolicy marginal_policy(const EnvSpec& env,
                            const std::vector<std::vector<double>>& action_probs);

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
  bool done = false;
};

/// One environment transition. `steps_taken` counts completed steps in the
/// episode; done is true when the next state is terminal or the horizon is
/// reached. Stepping from a terminal state throws.
StepResult env_step(const EnvSpec& env, int state, std::span<const int> joint_action,
                    Rng& rng, int steps_taken = 0);

int sample_initial_state(const EnvSpec& env, Rng& rng);

/// Plain-text serialization, round-trips bit-exactly (doubles printed with 17
/// significant digits). The format is documented in the README.
void write_env(const EnvSpec& env, std::ostream& out);
void write_env(const EnvSpec& env, const std::string& path);
EnvSpec read_env(std::istream& in);
EnvSpec read_env(const std::string& path);

}  // namespace odmarl
