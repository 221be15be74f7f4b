#include "odmarl/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "odmarl/error.hpp"
#include "format_util.hpp"

namespace odmarl {

const SparseRow& EmpiricalModel::support(int s, int a) const {
  if (!visited(s, a))
    throw NoDataError("no data for state " + std::to_string(s) + ", action " +
                      std::to_string(a));
  return mass[s][a];
}

double EmpiricalModel::transition_prob(int s, int a, int s2) const {
  const SparseRow& row = support(s, a);
  const auto it = std::lower_bound(row.begin(), row.end(), s2,
                                   [](const auto& e, int id) { return e.first < id; });
  if (it == row.end() || it->first != s2) return 0.0;
  return it->second / visit[s][a];
}

double EmpiricalModel::state_reward(int s) const {
  if (!reward_known[s])
    throw NoDataError("no reward observed for state " + std::to_string(s));
  return reward_of_state[s];
}

std::pair<double, double> EmpiricalModel::reward_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_states; ++s) {
    if (!reward_known[s]) continue;
    lo = std::min(lo, reward_of_state[s]);
    hi = std::max(hi, reward_of_state[s]);
  }
  if (lo > hi) throw NoDataError("model has no observed rewards");
  return {lo, hi};
}

EmpiricalModel build_model(const AgentDataset& dataset, int n_states, int n_actions,
                           double reward_tol) {
  EmpiricalModel model;
  model.n_states = n_states;
  model.n_actions = n_actions;
  model.mass.assign(n_states, std::vector<SparseRow>(n_actions));
  model.visit.assign(n_states, std::vector<double>(n_actions, 0.0));
  model.reward_of_state.assign(n_states, 0.0);
  model.reward_known.assign(n_states, 0);
  model.terminal.assign(n_states, 0);

  std::vector<std::vector<std::map<int, double>>> acc(
      n_states, std::vector<std::map<int, double>>(n_actions));
  std::vector<double> r_sum(n_states, 0.0), r_min(n_states, 0.0), r_max(n_states, 0.0);
  std::vector<long long> r_count(n_states, 0);
  std::vector<char> entered_done(n_states, 0);

  for (const auto& rec : dataset.records) {
    if (rec.state < 0 || rec.state >= n_states || rec.next_state < 0 ||
        rec.next_state >= n_states)
      throw ValidationError("build_model: record state id out of range");
    if (rec.action < 0 || rec.action >= n_actions)
      throw ValidationError("build_model: record action id out of range");

    acc[rec.state][rec.action][rec.next_state] += 1.0;
    model.visit[rec.state][rec.action] += 1.0;

    const int s2 = rec.next_state;
    if (r_count[s2] == 0) {
      r_min[s2] = r_max[s2] = rec.reward;
    } else {
      r_min[s2] = std::min(r_min[s2], rec.reward);
      r_max[s2] = std::max(r_max[s2], rec.reward);
    }
    r_sum[s2] += rec.reward;
    ++r_count[s2];
    if (rec.done) entered_done[s2] = 1;
  }

  for (int s = 0; s < n_states; ++s) {
    if (r_count[s] == 0) continue;
    if (r_max[s] - r_min[s] > reward_tol)
      throw ValidationError("build_model: inconsistent rewards for state " +
                            std::to_string(s) + " (spread " +
                            detail::fmt_g17(r_max[s] - r_min[s]) + " exceeds tolerance " +
                            detail::fmt_g17(reward_tol) + ")");
    model.reward_of_state[s] = r_sum[s] / static_cast<double>(r_count[s]);
    model.reward_known[s] = 1;
  }

  for (int s = 0; s < n_states; ++s) {
    bool any_visit = false;
    for (int a = 0; a < n_actions; ++a) {
      auto& row = model.mass[s][a];
      row.reserve(acc[s][a].size());
      for (const auto& [s2, w] : acc[s][a]) row.emplace_back(s2, w);
      any_visit |= !row.empty();
    }
    model.terminal[s] = entered_done[s] && !any_visit;
  }
  return model;
}

EmpiricalModel exact_model_from_env(const EnvSpec& env, const JointPolicy& behavior,
                                    int agent_id) {
  if (agent_id < 0 || agent_id >= env.n_agents)
    throw ValidationError("exact_model_from_env: agent id out of range");
  behavior.validate(env);

  EmpiricalModel model;
  model.n_states = env.n_states;
  model.n_actions = env.actions_per_agent[agent_id];
  model.mass.assign(env.n_states, std::vector<SparseRow>(model.n_actions));
  model.visit.assign(env.n_states, std::vector<double>(model.n_actions, 0.0));
  model.reward_of_state = env.reward;
  model.reward_known.assign(env.n_states, 1);
  model.terminal.assign(env.terminal.begin(), env.terminal.end());

  const int n_joint = env.n_joint_actions();
  for (int s = 0; s < env.n_states; ++s) {
    if (env.is_terminal(s)) continue;
    std::vector<std::map<int, double>> acc(model.n_actions);
    for (int j = 0; j < n_joint; ++j) {
      const auto joint = env.decode_joint(j);
      double w = 1.0;
      for (int i = 0; i < env.n_agents; ++i) {
        if (i == agent_id) continue;
        w *= behavior.probs[i][s][joint[i]];
      }
      if (w == 0.0) continue;
      const int own = joint[agent_id];
      for (const auto& [s2, p] : env.transition[s][j]) acc[own][s2] += w * p;
    }
    for (int a = 0; a < model.n_actions; ++a) {
      auto& row = model.mass[s][a];
      double total = 0.0;
      row.reserve(acc[a].size());
      for (const auto& [s2, w] : acc[a]) {
        row.emplace_back(s2, w);
        total += w;
      }
      model.visit[s][a] = total;  // 1 up to rounding: the marginal weights sum to one
    }
  }
  return model;
}

void dump_model(const EmpiricalModel& model, std::ostream& out) {
  out << "odmarl-model 1\n";
  out << "states " << model.n_states << "\n";
  out << "actions " << model.n_actions << "\n";
  out << "rewards";
  for (int s = 0; s < model.n_states; ++s) {
    out << ' ';
    if (model.reward_known[s])
      out << s << ':' << detail::fmt_g17(model.reward_of_state[s]);
    else
      out << s << ":?";
  }
  out << "\n";
  out << "terminals";
  for (int s = 0; s < model.n_states; ++s)
    if (model.terminal[s]) out << ' ' << s;
  out << "\n";
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      if (!model.visited(s, a)) continue;
      out << "t " << s << ' ' << a;
      for (const auto& [s2, w] : model.mass[s][a])
        out << ' ' << s2 << ':' << detail::fmt_g17(w / model.visit[s][a]);
      out << "\n";
    }
  }
  out << "end\n";
}

void dump_model(const EmpiricalModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  dump_model(model, out);
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace odmarl
