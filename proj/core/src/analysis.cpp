#include "odmarl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "odmarl/error.hpp"
#include "odmarl/learner.hpp"
#include "format_util.hpp"

namespace odmarl {

namespace {

void check_policies(const EnvSpec& env, const std::vector<std::vector<int>>& policies) {
  if (static_cast<int>(policies.size()) != env.n_agents)
    throw ValidationError("evaluate_joint: one policy per agent required");
  for (int i = 0; i < env.n_agents; ++i) {
    if (static_cast<int>(policies[i].size()) != env.n_states)
      throw ValidationError("evaluate_joint: policy must cover all states");
    for (int s = 0; s < env.n_states; ++s)
      if (!env.is_terminal(s) &&
          (policies[i][s] < 0 || policies[i][s] >= env.actions_per_agent[i]))
        throw ValidationError("evaluate_joint: action out of range in policy");
  }
}

}  // namespace

EvalReport evaluate_joint(const EnvSpec& env,
                          const std::vector<std::vector<int>>& policies,
                          int n_episodes, std::uint64_t seed) {
  if (n_episodes <= 0) throw ValidationError("evaluate_joint: n_episodes must be positive");
  check_policies(env, policies);

  std::vector<double> returns(n_episodes, 0.0);
  std::vector<int> joint(env.n_agents);
  for (int ep = 0; ep < n_episodes; ++ep) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ep)));
    int s = sample_initial_state(env, rng);
    double total = 0.0;
    bool done = false;
    int t = 0;
    while (!done) {
      for (int i = 0; i < env.n_agents; ++i) joint[i] = policies[i][s];
      const StepResult step = env_step(env, s, joint, rng, t);
      total += step.reward;
      s = step.next_state;
      done = step.done;
      ++t;
    }
    returns[ep] = total;
  }

  EvalReport report;
  report.n_episodes = n_episodes;
  report.mean_return =
      std::accumulate(returns.begin(), returns.end(), 0.0) / n_episodes;
  if (n_episodes > 1) {
    double ss = 0.0;
    for (double g : returns) ss += (g - report.mean_return) * (g - report.mean_return);
    report.std_return = std::sqrt(ss / (n_episodes - 1));
  }
  return report;
}

double value_consensus(const std::vector<QTable>& tables, const std::vector<int>& states) {
  if (tables.size() < 2)
    throw ValidationError("value_consensus: need at least two agents");
  if (states.empty()) throw ValidationError("value_consensus: states must be nonempty");
  double total = 0.0;
  for (int s : states) {
    double lo = tables[0].state_value(s);
    double hi = lo;
    for (const auto& t : tables) {
      const double v = t.state_value(s);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    total += hi - lo;
  }
  return total / static_cast<double>(states.size());
}

std::vector<int> sample_states(int n_states, int max_count, std::uint64_t seed) {
  std::vector<int> all(n_states);
  std::iota(all.begin(), all.end(), 0);
  if (n_states <= max_count) return all;
  Rng rng(seed);
  // partial Fisher-Yates
  for (int i = 0; i < max_count; ++i) {
    const int j = i + rng.uniform_int(n_states - i);
    std::swap(all[i], all[j]);
  }
  all.resize(max_count);
  return all;
}

double extrapolation_error(const EnvSpec& env,
                           const std::vector<std::vector<int>>& policies,
                           const std::vector<QTable>& tables, int n_episodes,
                           std::uint64_t seed, double gamma) {
  if (n_episodes <= 0)
    throw ValidationError("extrapolation_error: n_episodes must be positive");
  check_policies(env, policies);
  if (tables.size() != policies.size())
    throw ValidationError("extrapolation_error: one table per policy required");

  struct Bucket {
    double g_sum = 0.0;
    int count = 0;
  };
  std::map<int, Bucket> by_start;
  std::vector<int> joint(env.n_agents);
  for (int ep = 0; ep < n_episodes; ++ep) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ep)));
    const int start = sample_initial_state(env, rng);
    int s = start;
    double g = 0.0;
    double discount = 1.0;
    bool done = false;
    int t = 0;
    while (!done) {
      for (int i = 0; i < env.n_agents; ++i) joint[i] = policies[i][s];
      const StepResult step = env_step(env, s, joint, rng, t);
      g += discount * step.reward;
      discount *= gamma;
      s = step.next_state;
      done = step.done;
      ++t;
    }
    auto& bucket = by_start[start];
    bucket.g_sum += g;
    ++bucket.count;
  }

  double weighted = 0.0;
  for (const auto& [start, bucket] : by_start) {
    double q_mean = 0.0;
    for (std::size_t i = 0; i < tables.size(); ++i)
      q_mean += tables[i].value(start, policies[i][start]);
    q_mean /= static_cast<double>(tables.size());
    const double g_mean = bucket.g_sum / bucket.count;
    weighted += std::abs(q_mean - g_mean) * bucket.count;
  }
  return weighted / static_cast<double>(n_episodes);
}

EnvSpec make_episodic_template(int n_states, int n_actions, int n_agents,
                               std::uint64_t seed) {
  if (n_states < 4)
    throw ValidationError("make_episodic_template: need at least 4 states");
  Rng rng(seed);

  EnvSpec env;
  env.name = "episodic_template";
  env.n_agents = n_agents;
  env.n_states = n_states;
  env.actions_per_agent.assign(n_agents, n_actions);
  env.terminal.assign(n_states, 0);
  // the last two states are the terminals, a high- and a low-reward one
  const int t_good = n_states - 2;
  const int t_bad = n_states - 1;
  env.terminal[t_good] = env.terminal[t_bad] = 1;
  env.reward.resize(n_states);
  for (int s = 0; s < n_states - 2; ++s) env.reward[s] = rng.uniform(1.0, 5.0);
  env.reward[t_good] = 5.0;
  env.reward[t_bad] = 1.0;

  // layered kernel: transitions only to strictly later nonterminals or to a
  // terminal, so every trajectory is finite
  const int n_joint = env.n_joint_actions();
  env.transition.resize(n_states);
  for (int s = 0; s < n_states - 2; ++s) {
    std::vector<int> allowed;
    for (int s2 = s + 1; s2 < n_states - 2; ++s2) allowed.push_back(s2);
    allowed.push_back(t_good);
    allowed.push_back(t_bad);
    env.transition[s].resize(n_joint);
    for (int j = 0; j < n_joint; ++j) {
      std::vector<double> g(allowed.size());
      double total = 0.0;
      for (auto& x : g) {
        x = rng.exponential();
        total += x;
      }
      SparseRow row;
      row.reserve(allowed.size());
      for (std::size_t k = 0; k < allowed.size(); ++k)
        row.emplace_back(allowed[k], g[k] / total);
      env.transition[s][j] = std::move(row);
    }
  }
  const double p0 = 1.0 / (n_states - 2);
  for (int s = 0; s < n_states - 2; ++s) env.initial.emplace_back(s, p0);
  env.validate();
  return env;
}

namespace {

SparseRow dirichlet_row(const std::vector<int>& allowed, Rng& rng) {
  std::vector<double> g(allowed.size());
  double total = 0.0;
  for (auto& x : g) {
    x = rng.exponential();
    total += x;
  }
  SparseRow row;
  row.reserve(allowed.size());
  for (std::size_t k = 0; k < allowed.size(); ++k)
    row.emplace_back(allowed[k], g[k] / total);
  return row;
}

SparseRow mix_rows(const SparseRow& a, double wa, const SparseRow& b, double wb) {
  std::map<int, double> acc;
  for (const auto& [s, p] : a) acc[s] += wa * p;
  for (const auto& [s, p] : b) acc[s] += wb * p;
  SparseRow out;
  out.reserve(acc.size());
  for (const auto& [s, p] : acc) out.emplace_back(s, p);
  return out;
}

}  // namespace

double proposition1_check(const EnvSpec& env_template, int n_agents,
                          std::uint64_t seed, bool mismatched) {
  const int n_states = env_template.n_states;
  std::vector<int> nonterminals;
  std::vector<int> terminals;
  for (int s = 0; s < n_states; ++s)
    (env_template.is_terminal(s) ? terminals : nonterminals).push_back(s);
  if (terminals.size() < 2)
    throw ValidationError("proposition1_check: template needs two terminals");
  // highest/lowest-reward terminals anchor the deliberate mismatch
  int t_good = terminals[0], t_bad = terminals[0];
  for (int t : terminals) {
    if (env_template.reward[t] > env_template.reward[t_good]) t_good = t;
    if (env_template.reward[t] < env_template.reward[t_bad]) t_bad = t;
  }

  const int n_actions = env_template.actions_per_agent[0];
  Rng rng(seed);

  // shared next-state distribution for each state's greedy action, plus the
  // per-agent tilted variants used by the negative control
  std::vector<SparseRow> shared(n_states);
  std::vector<std::vector<int>> allowed_of(n_states);
  for (std::size_t k = 0; k < nonterminals.size(); ++k) {
    const int s = nonterminals[k];
    std::vector<int> allowed;
    for (std::size_t m = k + 1; m < nonterminals.size(); ++m)
      allowed.push_back(nonterminals[m]);
    allowed.push_back(t_good);
    allowed.push_back(t_bad);
    std::sort(allowed.begin(), allowed.end());
    allowed_of[s] = allowed;
    shared[s] = dirichlet_row(allowed, rng);
  }

  std::vector<EmpiricalModel> models(n_agents);
  std::vector<std::vector<SparseRow>> designated(n_agents,
                                                 std::vector<SparseRow>(n_states));
  std::vector<std::vector<int>> designated_action(n_agents,
                                                  std::vector<int>(n_states, 0));
  for (int i = 0; i < n_agents; ++i) {
    auto& model = models[i];
    model.n_states = n_states;
    model.n_actions = n_actions;
    model.mass.assign(n_states, std::vector<SparseRow>(n_actions));
    model.visit.assign(n_states, std::vector<double>(n_actions, 0.0));
    model.reward_of_state = env_template.reward;
    model.reward_known.assign(n_states, 1);
    model.terminal.assign(env_template.terminal.begin(), env_template.terminal.end());

    for (int s : nonterminals) {
      SparseRow greedy_row = shared[s];
      if (mismatched) {
        const int tilt = (i == 0) ? t_good : t_bad;
        greedy_row = mix_rows(shared[s], 0.5, SparseRow{{tilt, 1.0}}, 0.5);
      }
      designated[i][s] = greedy_row;
      const int g = rng.uniform_int(n_actions);
      designated_action[i][s] = g;
      for (int a = 0; a < n_actions; ++a) {
        if (a == g) {
          model.mass[s][a] = greedy_row;
        } else {
          // drag non-designated actions toward the bad terminal
          model.mass[s][a] =
              mix_rows(SparseRow{{t_bad, 1.0}}, 0.6, dirichlet_row(allowed_of[s], rng), 0.4);
        }
        model.visit[s][a] = 1.0;
      }
    }
  }

  LearnConfig config;
  config.gamma = 0.95;
  config.tol = 1e-13;
  config.max_sweeps = 10000;
  config.transform.mode = TransformMode::none;

  // Realign until every agent's greedy action carries its designated row:
  // each round either confirms alignment or overwrites one more row, so this
  // terminates quickly or fails loudly.
  std::vector<QTable> tables(n_agents);
  const int max_rounds = 10 * n_actions;
  bool aligned = false;
  for (int round = 0; round < max_rounds && !aligned; ++round) {
    aligned = true;
    for (int i = 0; i < n_agents; ++i) {
      tables[i] = modified_value_iteration(models[i], config);
      for (int s : nonterminals) {
        const int g = tables[i].greedy_action(s);
        if (g < 0)
          throw ValidationError("proposition1_check: state without greedy action");
        if (models[i].mass[s][g] != designated[i][s]) {
          models[i].mass[s][g] = designated[i][s];
          aligned = false;
        }
      }
    }
  }
  if (!aligned)
    throw NonConvergenceError("proposition1_check: greedy alignment did not reach a fixed point",
                              0.0);

  double spread = 0.0;
  for (int s : nonterminals) {
    double lo = tables[0].state_value(s);
    double hi = lo;
    for (const auto& t : tables) {
      const double v = t.state_value(s);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    spread = std::max(spread, hi - lo);
  }
  return spread;
}

void append_eval_csv(std::ostream& out, const std::string& run_id, const EvalReport& report) {
  out << run_id << ",mean_return," << detail::fmt_g17(report.mean_return) << "\n";
  out << run_id << ",std_return," << detail::fmt_g17(report.std_return) << "\n";
  out << run_id << ",n_episodes," << report.n_episodes << "\n";
  for (const auto& [name, value] : report.metrics)
    out << run_id << ',' << name << ',' << detail::fmt_g17(value) << "\n";
}

}  // namespace odmarl
