#include "odmarl/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "odmarl/error.hpp"
#include "format_util.hpp"

namespace odmarl {

namespace {

constexpr double kDistributionTol = 1e-12;

void check_distribution(const SparseRow& row, const std::string& what, int n_states) {
  if (row.empty()) throw ValidationError(what + ": empty distribution");
  double sum = 0.0;
  int prev = -1;
  for (const auto& [s, p] : row) {
    if (s < 0 || s >= n_states) throw ValidationError(what + ": state id out of range");
    if (s <= prev) throw ValidationError(what + ": entries not sorted by state");
    if (p < 0.0) throw ValidationError(what + ": negative probability");
    prev = s;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTol)
    throw ValidationError(what + ": probabilities sum to " + detail::fmt_g17(sum));
}

}  // namespace

int EnvSpec::n_joint_actions() const {
  int n = 1;
  for (int a : actions_per_agent) n *= a;
  return n;
}

int EnvSpec::joint_index(std::span<const int> actions) const {
  int idx = 0;
  int stride = 1;
  for (int i = 0; i < n_agents; ++i) {
    idx += actions[i] * stride;
    stride *= actions_per_agent[i];
  }
  return idx;
}

std::vector<int> EnvSpec::decode_joint(int joint) const {
  std::vector<int> actions(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    actions[i] = joint % actions_per_agent[i];
    joint /= actions_per_agent[i];
  }
  return actions;
}

void EnvSpec::validate() const {
  if (n_agents <= 0) throw ValidationError("EnvSpec: n_agents must be positive");
  if (n_states <= 0) throw ValidationError("EnvSpec: n_states must be positive");
  if (static_cast<int>(actions_per_agent.size()) != n_agents)
    throw ValidationError("EnvSpec: actions_per_agent size mismatch");
  for (int a : actions_per_agent)
    if (a <= 0) throw ValidationError("EnvSpec: agent with no actions");
  if (static_cast<int>(reward.size()) != n_states ||
      static_cast<int>(terminal.size()) != n_states ||
      static_cast<int>(transition.size()) != n_states)
    throw ValidationError("EnvSpec: per-state arrays must have n_states entries");
  if (horizon && *horizon <= 0) throw ValidationError("EnvSpec: horizon must be positive");

  const int n_joint = n_joint_actions();
  for (int s = 0; s < n_states; ++s) {
    if (terminal[s]) {
      if (!transition[s].empty())
        throw ValidationError("EnvSpec: terminal state " + std::to_string(s) +
                              " has outgoing transitions");
      continue;
    }
    if (static_cast<int>(transition[s].size()) != n_joint)
      throw ValidationError("EnvSpec: state " + std::to_string(s) +
                            " must have one row per joint action");
    for (int j = 0; j < n_joint; ++j)
      check_distribution(transition[s][j],
                         "EnvSpec row (" + std::to_string(s) + "," + std::to_string(j) + ")",
                         n_states);
  }
  check_distribution(initial, "EnvSpec initial distribution", n_states);
  for (const auto& [s, p] : initial)
    if (terminal[s] && p > 0.0)
      throw ValidationError("EnvSpec: initial distribution puts mass on a terminal state");
}

void JointPolicy::validate(const EnvSpec& env) const {
  if (static_cast<int>(probs.size()) != env.n_agents)
    throw ValidationError("JointPolicy: one table per agent required");
  for (int i = 0; i < env.n_agents; ++i) {
    if (static_cast<int>(probs[i].size()) != env.n_states)
      throw ValidationError("JointPolicy: one distribution per state required");
    for (int s = 0; s < env.n_states; ++s) {
      if (env.is_terminal(s)) continue;
      const auto& d = probs[i][s];
      if (static_cast<int>(d.size()) != env.actions_per_agent[i])
        throw ValidationError("JointPolicy: action distribution size mismatch");
      double sum = 0.0;
      for (double p : d) {
        if (p < 0.0) throw ValidationError("JointPolicy: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kDistributionTol)
        throw ValidationError("JointPolicy: distribution at state " + std::to_string(s) +
                              " sums to " + detail::fmt_g17(sum));
    }
  }
}

EnvSpec matrix_game() {
  EnvSpec env;
  env.name = "matrix_game";
  env.n_agents = 2;
  env.n_states = 4;  // 0 decision, 1 pays 1, 2 pays 5, 3 pays 6
  env.actions_per_agent = {2, 2};
  env.reward = {0.0, 1.0, 5.0, 6.0};
  env.terminal = {0, 1, 1, 1};
  env.horizon = 1;
  env.initial = {{0, 1.0}};
  env.transition.resize(4);
  // joint index = a1 + 2 * a2
  env.transition[0] = {
      {{1, 1.0}},  // (a1, a1) -> pays 1
      {{3, 1.0}},  // (a2, a1) -> pays 6
      {{2, 1.0}},  // (a1, a2) -> pays 5
      {{1, 1.0}},  // (a2, a2) -> pays 1
  };
  env.validate();
  return env;
}

double dg_reward(double x1, double x2) {
  if (x1 < -1.0 || x1 > 1.0 || x2 < -1.0 || x2 > 1.0)
    throw ValidationError("dg_reward: positions must lie in [-1, 1]");
  const double l = std::sqrt(x1 * x1 + x2 * x2);
  if (l < 0.2) return 0.5 * (std::cos(15.0 * l) + 1.0);
  if (l <= 0.6) return 0.0;
  return 0.5 * (l - 0.6) * (l - 0.6);
}

EnvSpec discretized_dg(int pos_bins, int act_bins, int horizon) {
  if (pos_bins < 3 || pos_bins % 2 == 0)
    throw ValidationError("discretized_dg: pos_bins must be odd and >= 3");
  if (act_bins < 3 || act_bins % 2 == 0)
    throw ValidationError("discretized_dg: act_bins must be odd and >= 3");
  if (horizon <= 0) throw ValidationError("discretized_dg: horizon must be positive");

  const int p = pos_bins;
  auto center = [p](int bin) { return -1.0 + 2.0 * bin / (p - 1); };

  // Speeds act as integer bin deltas: round-half-up on the grid coordinate,
  // so the tie at half a bin width snaps to the higher bin. Under a uniform
  // policy this gives the position a slight upward drift; the offline kernel
  // then differs from the one greedy opponents induce in execution.
  std::vector<int> delta(act_bins);
  const double bin_width = 2.0 / (p - 1);
  for (int j = 0; j < act_bins; ++j) {
    const double speed = -0.1 + 0.2 * j / (act_bins - 1);
    delta[j] = static_cast<int>(std::floor(speed / bin_width + 0.5));
  }
  auto move = [&](int bin, int action) {
    return std::clamp(bin + delta[action], 0, p - 1);
  };

  EnvSpec env;
  env.name = "differential_game";
  env.n_agents = 2;
  env.n_states = p * p;
  env.actions_per_agent = {act_bins, act_bins};
  env.horizon = horizon;
  env.reward.resize(env.n_states);
  env.terminal.assign(env.n_states, 0);
  env.transition.resize(env.n_states);
  env.initial.reserve(env.n_states);
  const double p0 = 1.0 / env.n_states;
  for (int s = 0; s < env.n_states; ++s) env.initial.emplace_back(s, p0);

  const int n_joint = act_bins * act_bins;
  for (int b1 = 0; b1 < p; ++b1) {
    for (int b2 = 0; b2 < p; ++b2) {
      const int s = b1 * p + b2;
      env.reward[s] = dg_reward(center(b1), center(b2));
      env.transition[s].resize(n_joint);
      for (int a1 = 0; a1 < act_bins; ++a1) {
        for (int a2 = 0; a2 < act_bins; ++a2) {
          const int next = move(b1, a1) * p + move(b2, a2);
          env.transition[s][a1 + act_bins * a2] = {{next, 1.0}};
        }
      }
    }
  }
  env.validate();
  return env;
}

EnvSpec random_mdp(int n_states, int n_actions_per_agent, int n_agents,
                   double r_min, double r_max, std::uint64_t seed,
                   std::optional<int> horizon) {
  if (r_min <= 0.0) throw ValidationError("random_mdp: r_min must be positive");
  if (r_max < r_min) throw ValidationError("random_mdp: r_max must be >= r_min");
  if (n_states <= 0 || n_actions_per_agent <= 0 || n_agents <= 0)
    throw ValidationError("random_mdp: sizes must be positive");

  Rng rng(seed);
  EnvSpec env;
  env.name = "random_mdp";
  env.n_agents = n_agents;
  env.n_states = n_states;
  env.actions_per_agent.assign(n_agents, n_actions_per_agent);
  env.horizon = horizon;
  env.terminal.assign(n_states, 0);
  env.reward.resize(n_states);
  for (int s = 0; s < n_states; ++s) env.reward[s] = rng.uniform(r_min, r_max);

  const int n_joint = env.n_joint_actions();
  env.transition.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    env.transition[s].resize(n_joint);
    for (int j = 0; j < n_joint; ++j) {
      // symmetric Dirichlet(1): normalized unit exponentials
      std::vector<double> g(n_states);
      double total = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        g[s2] = rng.exponential();
        total += g[s2];
      }
      SparseRow row;
      row.reserve(n_states);
      for (int s2 = 0; s2 < n_states; ++s2) row.emplace_back(s2, g[s2] / total);
      env.transition[s][j] = std::move(row);
    }
  }
  const double p0 = 1.0 / n_states;
  for (int s = 0; s < n_states; ++s) env.initial.emplace_back(s, p0);
  env.validate();
  return env;
}

JointPolicy uniform_policy(const EnvSpec& env) {
  JointPolicy pi;
  pi.probs.resize(env.n_agents);
  for (int i = 0; i < env.n_agents; ++i) {
    const double p = 1.0 / env.actions_per_agent[i];
    pi.probs[i].assign(env.n_states,
                       std::vector<double>(env.actions_per_agent[i], p));
  }
  return pi;
}

JointPolicy marginal_policy(const EnvSpec& env,
                            const std::vector<std::vector<double>>& action_probs) {
  if (static_cast<int>(action_probs.size()) != env.n_agents)
    throw ValidationError("marginal_policy: one distribution per agent required");
  JointPolicy pi;
  pi.probs.resize(env.n_agents);
  for (int i = 0; i < env.n_agents; ++i) {
    if (static_cast<int>(action_probs[i].size()) != env.actions_per_agent[i])
      throw ValidationError("marginal_policy: distribution size mismatch for agent " +
                            std::to_string(i));
    pi.probs[i].assign(env.n_states, action_probs[i]);
  }
  pi.validate(env);
  return pi;
}

StepResult env_step(const EnvSpec& env, int state, std::span<const int> joint_action,
                    Rng& rng, int steps_taken) {
  if (state < 0 || state >= env.n_states)
    throw ValidationError("env_step: state out of range");
  if (env.is_terminal(state))
    throw ValidationError("env_step: cannot step from terminal state " +
                          std::to_string(state));
  if (static_cast<int>(joint_action.size()) != env.n_agents)
    throw ValidationError("env_step: joint action size mismatch");
  for (int i = 0; i < env.n_agents; ++i)
    if (joint_action[i] < 0 || joint_action[i] >= env.actions_per_agent[i])
      throw ValidationError("env_step: action out of range for agent " + std::to_string(i));

  const int joint = env.joint_index(joint_action);
  const int next = rng.categorical(env.transition[state][joint]);
  StepResult result;
  result.next_state = next;
  result.reward = env.reward[next];
  result.done = env.is_terminal(next) ||
                (env.horizon && steps_taken + 1 >= *env.horizon);
  return result;
}

int sample_initial_state(const EnvSpec& env, Rng& rng) {
  return rng.categorical(env.initial);
}

void write_env(const EnvSpec& env, std::ostream& out) {
  out << "odmarl-env 1\n";
  out << "name " << env.name << "\n";
  out << "agents " << env.n_agents << "\n";
  out << "states " << env.n_states << "\n";
  out << "actions";
  for (int a : env.actions_per_agent) out << ' ' << a;
  out << "\n";
  if (env.horizon)
    out << "horizon " << *env.horizon << "\n";
  else
    out << "horizon none\n";
  out << "rewards";
  for (double r : env.reward) out << ' ' << detail::fmt_g17(r);
  out << "\n";
  out << "terminals";
  for (int s = 0; s < env.n_states; ++s)
    if (env.terminal[s]) out << ' ' << s;
  out << "\n";
  out << "initial";
  for (const auto& [s, p] : env.initial) out << ' ' << s << ':' << detail::fmt_g17(p);
  out << "\n";
  int n_rows = 0;
  for (int s = 0; s < env.n_states; ++s)
    n_rows += static_cast<int>(env.transition[s].size());
  out << "transitions " << n_rows << "\n";
  for (int s = 0; s < env.n_states; ++s) {
    for (std::size_t j = 0; j < env.transition[s].size(); ++j) {
      out << "t " << s << ' ' << j;
      for (const auto& [s2, p] : env.transition[s][j])
        out << ' ' << s2 << ':' << detail::fmt_g17(p);
      out << "\n";
    }
  }
  out << "end\n";
}

void write_env(const EnvSpec& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_env(env, out);
  if (!out) throw IoError("failed writing " + path);
}

namespace {

SparseRow parse_sparse(std::istringstream& line, const std::string& what) {
  SparseRow row;
  std::string tok;
  while (line >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw IoError(what + ": expected state:prob, got '" + tok + "'");
    row.emplace_back(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
  }
  return row;
}

}  // namespace

EnvSpec read_env(std::istream& in) {
  std::string line;
  auto next_line = [&](const std::string& what) {
    if (!std::getline(in, line)) throw IoError("env file truncated before " + what);
    return std::istringstream(line);
  };

  auto header = next_line("header");
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != "odmarl-env" || version != 1)
    throw IoError("not an odmarl-env version 1 file");

  EnvSpec env;
  std::string key;

  auto name_line = next_line("name");
  name_line >> key >> env.name;
  auto agents_line = next_line("agents");
  agents_line >> key >> env.n_agents;
  auto states_line = next_line("states");
  states_line >> key >> env.n_states;

  auto actions_line = next_line("actions");
  actions_line >> key;
  int a;
  while (actions_line >> a) env.actions_per_agent.push_back(a);

  auto horizon_line = next_line("horizon");
  std::string horizon_tok;
  horizon_line >> key >> horizon_tok;
  if (horizon_tok != "none") env.horizon = std::stoi(horizon_tok);

  auto rewards_line = next_line("rewards");
  rewards_line >> key;
  double r;
  while (rewards_line >> r) env.reward.push_back(r);

  env.terminal.assign(env.n_states, 0);
  auto terminals_line = next_line("terminals");
  terminals_line >> key;
  int t;
  while (terminals_line >> t) {
    if (t < 0 || t >= env.n_states) throw IoError("terminal id out of range");
    env.terminal[t] = 1;
  }

  auto initial_line = next_line("initial");
  initial_line >> key;
  env.initial = parse_sparse(initial_line, "initial");

  auto count_line = next_line("transitions");
  int n_rows = 0;
  count_line >> key >> n_rows;

  env.transition.resize(env.n_states);
  for (int s = 0; s < env.n_states; ++s) {
    if (!env.terminal[s]) env.transition[s].resize(env.n_joint_actions());
  }
  for (int i = 0; i < n_rows; ++i) {
    auto row_line = next_line("transition row");
    std::string tag;
    int s = 0, j = 0;
    row_line >> tag >> s >> j;
    if (tag != "t") throw IoError("expected transition row, got '" + line + "'");
    if (s < 0 || s >= env.n_states || env.terminal[s])
      throw IoError("transition row for invalid state " + std::to_string(s));
    if (j < 0 || j >= env.n_joint_actions())
      throw IoError("transition row with invalid joint index");
    env.transition[s][j] = parse_sparse(row_line, "transition row");
  }
  auto end_line = next_line("end");
  end_line >> key;
  if (key != "end") throw IoError("missing end marker");

  env.validate();
  return env;
}

EnvSpec read_env(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_env(in);
}

}  // namespace odmarl
