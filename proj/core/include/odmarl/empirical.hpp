#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "odmarl/dataset.hpp"
#include "odmarl/env.hpp"

namespace odmarl {

/// One agent's visible MDP, estimated from its own dataset: next-state
/// masses per (state, own action), state rewards, and observed supports.
/// Immutable after construction.
struct EmpiricalModel {
  int n_states = 0;
  int n_actions = 0;  // own actions
  /// mass[s][a]: (next state, accumulated weight), sorted by next state.
  /// Probabilities are mass / visit; analytic models store weights that
  /// already sum to one.
  std::vector<std::vector<SparseRow>> mass;
  /// visit[s][a]: total accumulated weight of (s, a).
  std::vector<std::vector<double>> visit;
  std::vector<double> reward_of_state;
  std::vector<char> reward_known;
  /// Entered with done and never left: has no outgoing observations.
  std::vector<char> terminal;

  bool visited(int s, int a) const { return visit[s][a] > 0.0; }

  /// Observed next states of (s, a). Throws NoDataError when unvisited.
  const SparseRow& support(int s, int a) const;

  /// mass(s, a, s2) / mass(s, a); zero for s2 outside the support.
  /// Throws NoDataError when (s, a) is unvisited.
  double transition_prob(int s, int a, int s2) const;

  /// Mean observed reward on entering s; throws when never observed.
  double state_reward(int s) const;

  /// (min, max) over states with a known reward.
  std::pair<double, double> reward_range() const;
};

/// Accumulates counts, supports, and state rewards from a dataset. Rewards
/// observed for the same next state must agree within reward_tol (the
/// tabular convention is reward-of-state; a looser tolerance is the escape
/// hatch for environments whose discretization jitters rewards).
EmpiricalModel build_model(const AgentDataset& dataset, int n_states, int n_actions,
                           double reward_tol = 1e-9);

/// The infinite-data model, computed analytically by marginalizing the other
/// agents' behavior out of the environment kernel:
///   P(s2 | s, a_i) = sum over other-actions of P_env(s2 | s, joint) * pi_others.
EmpiricalModel exact_model_from_env(const EnvSpec& env, const JointPolicy& behavior,
                                    int agent_id);

/// Plain-text dump in the same style as the EnvSpec format, for
/// cross-implementation diffing.
void dump_model(const EmpiricalModel& model, std::ostream& out);
void dump_model(const EmpiricalModel& model, const std::string& path);

}  // namespace odmarl
