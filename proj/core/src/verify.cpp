#include "odmarl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "odmarl/analysis.hpp"
#include "odmarl/dataset.hpp"
#include "odmarl/empirical.hpp"
#include "odmarl/error.hpp"
#include "odmarl/learner.hpp"
#include "format_util.hpp"

namespace odmarl {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double sup_gap(const QTable& a, const QTable& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.q.size(); ++i)
    gap = std::max(gap, std::abs(a.q[i] - b.q[i]));
  return gap;
}

void fail_case(SuiteResult& result, const std::string& diagnostic) {
  ++result.cases_failed;
  if (result.notes.size() < 50) result.notes.push_back(diagnostic);
}

double binomial_tail(int n, int wins) {
  // P(Binomial(n, 1/2) >= wins)
  double tail = 0.0;
  for (int k = wins; k <= n; ++k) {
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c *= static_cast<double>(n - k + j) / j;
    tail += c;
  }
  return tail * std::pow(0.5, n);
}

// Suite-local MDP whose transition probabilities are bounded away from zero,
// so the reciprocal-probability weights of the TD path stay bounded at the
// fixed step budget. Rewards span [r_lo, r_hi].
EnvSpec bounded_random_mdp(int n_states, int n_actions, double r_lo, double r_hi,
                           std::uint64_t seed, int horizon) {
  Rng rng(seed);
  EnvSpec env;
  env.name = "bounded_random_mdp";
  env.n_agents = 1;
  env.n_states = n_states;
  env.actions_per_agent = {n_actions};
  env.horizon = horizon;
  env.terminal.assign(n_states, 0);
  env.reward.resize(n_states);
  for (int s = 0; s < n_states; ++s) env.reward[s] = rng.uniform(r_lo, r_hi);
  env.transition.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    env.transition[s].resize(n_actions);
    for (int a = 0; a < n_actions; ++a) {
      std::vector<double> w(n_states);
      double total = 0.0;
      for (auto& x : w) {
        x = 0.5 + rng.uniform01();
        total += x;
      }
      SparseRow row;
      for (int s2 = 0; s2 < n_states; ++s2) row.emplace_back(s2, w[s2] / total);
      env.transition[s][a] = std::move(row);
    }
  }
  const double p0 = 1.0 / n_states;
  for (int s = 0; s < n_states; ++s) env.initial.emplace_back(s, p0);
  env.validate();
  return env;
}

}  // namespace

SuiteResult run_contraction_suite(int n_cases, std::uint64_t seed) {
  Stopwatch watch;
  SuiteResult result;
  result.name = "contraction";

  const std::pair<double, double> ranges[] = {{1.0, 5.0}, {2.0, 3.0}, {4.0, 5.0}};
  double worst_gap = 0.0;
  double worst_modulus = 0.0;

  for (int i = 0; i < n_cases; ++i) {
    ++result.cases_run;
    const auto [r_min, r_max] = ranges[i % 3];
    const int n_states = 4 + (i % 7);
    const int n_actions = 2 + (i % 2);
    const EnvSpec env =
        random_mdp(n_states, n_actions, 1, r_min, r_max, mix_seed(seed, i));
    const EmpiricalModel model = exact_model_from_env(env, uniform_policy(env), 0);

    const double gamma = 0.9 * gamma_bound(r_min, r_max);
    const double eta = horizon_eta(gamma);
    const double modulus_bound = gamma * (2.0 * r_max / r_min - 1.0) + 1e-9;

    TransformSpec spec;
    spec.mode = TransformMode::vd_tn;
    spec.clip_enabled = false;

    QTable q1 = QTable::constant(model, eta * r_min);
    QTable q2 = QTable::constant(model, eta * r_max);

    bool case_ok = true;
    double case_modulus = 0.0;
    for (int sweep = 0; sweep < 5000; ++sweep) {
      const double den = sup_gap(q1, q2);
      const QTable t1 = vi_sweep(model, q1, gamma, spec);
      const QTable t2 = vi_sweep(model, q2, gamma, spec);
      if (den > 1e-12) {
        const double ratio = sup_gap(t1, t2) / den;
        case_modulus = std::max(case_modulus, ratio);
        if (ratio > modulus_bound) {
          fail_case(result, "case " + std::to_string(i) + ": per-sweep modulus " +
                                detail::fmt_g17(ratio) + " exceeds bound " +
                                detail::fmt_g17(modulus_bound));
          case_ok = false;
          break;
        }
      }
      const double r1 = sup_gap(t1, q1);
      const double r2 = sup_gap(t2, q2);
      q1 = t1;
      q2 = t2;
      if (r1 < 1e-13 && r2 < 1e-13) break;
    }
    if (!case_ok) continue;

    const double gap = sup_gap(q1, q2);
    worst_gap = std::max(worst_gap, gap);
    worst_modulus = std::max(worst_modulus, case_modulus);
    if (gap >= 1e-8)
      fail_case(result, "case " + std::to_string(i) +
                            ": dual-initialization fixed points differ by " +
                            detail::fmt_g17(gap));
  }

  result.notes.push_back("worst fixed-point gap " + detail::fmt_g17(worst_gap) +
                         ", worst per-sweep modulus " + detail::fmt_g17(worst_modulus));

  // Informational: the discount bound is sufficient, not necessary, so a run
  // outside it is reported without being asserted either way.
  {
    const EnvSpec env = random_mdp(6, 2, 1, 1.0, 5.0, mix_seed(seed, 999983));
    const EmpiricalModel model = exact_model_from_env(env, uniform_policy(env), 0);
    LearnConfig config;
    config.gamma = 0.99;
    config.tol = 1e-10;
    config.max_sweeps = 2000;
    config.transform.mode = TransformMode::vd_tn;
    config.q_init = horizon_eta(0.99) * 1.0;
    std::string status;
    try {
      modified_value_iteration(model, config);
      status = "converged";
    } catch (const NonConvergenceError& e) {
      status = "did not converge (residual " + detail::fmt_g17(e.residual()) + ")";
    }
    result.notes.push_back(
        "informational: gamma=0.99 with rewards [1,5] lies outside the bound; run " + status);
  }

  result.passed = result.cases_failed == 0;
  result.seconds = watch.seconds();
  return result;
}

SuiteResult run_proposition1_suite(int n_cases, std::uint64_t seed) {
  Stopwatch watch;
  SuiteResult result;
  result.name = "proposition1";

  double worst_matched = 0.0;
  double best_mismatched = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_cases; ++i) {
    ++result.cases_run;
    const EnvSpec tmpl = make_episodic_template(6, 3, 2, mix_seed(seed, 2 * i));
    const double gap = proposition1_check(tmpl, 2, mix_seed(seed, 2 * i + 1), false);
    worst_matched = std::max(worst_matched, gap);
    if (gap >= 1e-8)
      fail_case(result, "matched case " + std::to_string(i) + ": value spread " +
                            detail::fmt_g17(gap));

    ++result.cases_run;
    const EnvSpec tmpl2 = make_episodic_template(6, 3, 2, mix_seed(seed, 90000 + 2 * i));
    const double gap2 =
        proposition1_check(tmpl2, 2, mix_seed(seed, 90001 + 2 * i), true);
    best_mismatched = std::min(best_mismatched, gap2);
    if (gap2 <= 1e-4)
      fail_case(result, "negative control " + std::to_string(i) +
                            " failed to separate: spread " + detail::fmt_g17(gap2));
  }
  result.notes.push_back("worst matched spread " + detail::fmt_g17(worst_matched) +
                         ", smallest mismatched spread " +
                         detail::fmt_g17(best_mismatched));
  result.passed = result.cases_failed == 0;
  result.seconds = watch.seconds();
  return result;
}

SuiteResult run_td_equivalence_suite(int n_random_cases, std::uint64_t seed) {
  Stopwatch watch;
  SuiteResult result;
  result.name = "td-equivalence";

  TransformSpec spec;
  spec.mode = TransformMode::vd_tn;
  spec.clip_enabled = false;

  double worst = 0.0;
  auto compare = [&](const AgentDataset& dataset, const EmpiricalModel& model,
                     double gamma, std::uint64_t td_seed, const std::string& label) {
    ++result.cases_run;
    LearnConfig vi_cfg;
    vi_cfg.gamma = gamma;
    vi_cfg.tol = 1e-12;
    vi_cfg.max_sweeps = 5000;
    vi_cfg.transform = spec;
    const QTable q_vi = modified_value_iteration(model, vi_cfg);

    LearnConfig td_cfg = vi_cfg;
    td_cfg.lr = 1e-3;
    td_cfg.steps = 100000;
    td_cfg.polish_fraction = 0.5;
    td_cfg.seed = td_seed;
    const QTable q_td = weighted_td_learning(dataset, model, td_cfg);

    const double gap = sup_gap(q_vi, q_td);
    worst = std::max(worst, gap);
    if (gap > 0.05)
      fail_case(result, label + ": sup-norm gap " + detail::fmt_g17(gap));
  };

  {
    const EnvSpec env = matrix_game();
    const JointPolicy behavior = marginal_policy(env, {{0.8, 0.2}, {0.4, 0.6}});
    const auto datasets = collect(env, behavior, 100000, mix_seed(seed, 1));
    for (int agent = 0; agent < env.n_agents; ++agent) {
      const EmpiricalModel model =
          build_model(datasets[agent], env.n_states, env.actions_per_agent[agent]);
      compare(datasets[agent], model, 0.99, mix_seed(seed, 100 + agent),
              "matrix game agent " + std::to_string(agent + 1));
    }
  }

  for (int i = 0; i < n_random_cases; ++i) {
    const EnvSpec env = bounded_random_mdp(3, 2, 4.0, 4.5, mix_seed(seed, 200 + i), 20);
    const auto datasets = collect(env, uniform_policy(env), 2500, mix_seed(seed, 300 + i));
    const EmpiricalModel model = build_model(datasets[0], env.n_states, 2);
    compare(datasets[0], model, 0.3, mix_seed(seed, 400 + i),
            "3-state case " + std::to_string(i));
  }

  result.notes.push_back("worst sup-norm gap " + detail::fmt_g17(worst));
  result.passed = result.cases_failed == 0;
  result.seconds = watch.seconds();
  return result;
}

SuiteResult run_affine_invariance_suite(int n_cases, std::uint64_t seed) {
  Stopwatch watch;
  SuiteResult result;
  result.name = "affine-invariance";

  for (int i = 0; i < n_cases; ++i) {
    ++result.cases_run;
    const int n_states = 4 + (i % 5);
    const int n_actions = 2 + (i % 2);
    const EnvSpec env = random_mdp(n_states, n_actions, 1, 1.0, 5.0, mix_seed(seed, i),
                                   10 + (i % 10));
    const EmpiricalModel model = exact_model_from_env(env, uniform_policy(env), 0);

    LearnConfig config;
    config.gamma = 0.9;
    config.tol = 1e-12;
    config.max_sweeps = 2000;
    config.transform.mode = TransformMode::none;

    const std::vector<int> before = greedy_policy(modified_value_iteration(model, config));
    const double new_min = 0.5 + 0.5 * (i % 4);
    const double new_max = new_min + 1.0 + (i % 3);
    const EmpiricalModel rescaled = rescale_rewards(model, new_min, new_max);
    const std::vector<int> after = greedy_policy(modified_value_iteration(rescaled, config));

    if (before != after)
      fail_case(result, "case " + std::to_string(i) +
                            ": greedy policy changed under reward rescale to [" +
                            detail::fmt_g17(new_min) + "," + detail::fmt_g17(new_max) + "]");
  }
  result.passed = result.cases_failed == 0;
  result.seconds = watch.seconds();
  return result;
}

namespace {

// The discretized game and the greedy policies are both deterministic, so one
// rollout per start state gives the exact mean return over the uniform
// initial distribution.
double dg_exact_mean_return(const EnvSpec& env,
                            const std::vector<std::vector<int>>& policies) {
  double total = 0.0;
  Rng rng(0);
  std::vector<int> joint(env.n_agents);
  for (int start = 0; start < env.n_states; ++start) {
    int s = start;
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
  }
  return total / env.n_states;
}

}  // namespace

SuiteResult run_dg_improvement_suite(int n_seeds, std::uint64_t seed) {
  Stopwatch watch;
  SuiteResult result;
  result.name = "dg-improvement";

  const EnvSpec env = discretized_dg(21, 5, 25);
  const JointPolicy behavior = uniform_policy(env);

  double sum_none = 0.0;
  double sum_vdtn = 0.0;
  int wins = 0;
  int losses = 0;

  for (int k = 0; k < n_seeds; ++k) {
    ++result.cases_run;
    // 4000 episodes x 25 steps = 1e5 transitions per agent
    const auto datasets = collect(env, behavior, 4000, mix_seed(seed, k));

    std::vector<EmpiricalModel> models;
    for (int i = 0; i < env.n_agents; ++i)
      models.push_back(rescale_rewards(
          build_model(datasets[i], env.n_states, env.actions_per_agent[i]), 0.05, 1.05));

    auto train_and_eval = [&](TransformMode mode) {
      LearnConfig config;
      config.gamma = 0.99;
      config.tol = 1e-8;
      config.max_sweeps = 40000;
      config.transform.mode = mode;
      config.transform.clip_enabled = false;
      config.q_init = horizon_eta(config.gamma) * 0.05;
      std::vector<std::vector<int>> policies;
      for (const auto& model : models)
        policies.push_back(greedy_policy(modified_value_iteration(model, config)));
      return dg_exact_mean_return(env, policies);
    };

    const double ret_none = train_and_eval(TransformMode::none);
    const double ret_vdtn = train_and_eval(TransformMode::vd_tn);
    sum_none += ret_none;
    sum_vdtn += ret_vdtn;
    if (ret_vdtn > ret_none)
      ++wins;
    else if (ret_vdtn < ret_none)
      ++losses;
    result.notes.push_back("seed " + std::to_string(k) + ": none " +
                           detail::fmt_fixed(ret_none, 3) + ", vd_tn " +
                           detail::fmt_fixed(ret_vdtn, 3));
  }

  const double mean_none = sum_none / n_seeds;
  const double mean_vdtn = sum_vdtn / n_seeds;
  const int n_eff = wins + losses;
  const double p_value = n_eff > 0 ? binomial_tail(n_eff, wins) : 1.0;

  if (!(mean_vdtn > mean_none))
    fail_case(result, "mean return did not improve: none " + detail::fmt_g17(mean_none) +
                          " vs vd_tn " + detail::fmt_g17(mean_vdtn));
  if (p_value > 0.05)
    fail_case(result, "one-sided sign test not significant: " + std::to_string(wins) +
                          "/" + std::to_string(n_eff) + " wins, p = " +
                          detail::fmt_g17(p_value));

  result.notes.push_back("mean return none " + detail::fmt_fixed(mean_none, 3) +
                         ", vd_tn " + detail::fmt_fixed(mean_vdtn, 3) + "; sign test " +
                         std::to_string(wins) + "/" + std::to_string(n_eff) +
                         " wins, p = " + detail::fmt_g17(p_value));
  result.passed = result.cases_failed == 0;
  result.seconds = watch.seconds();
  return result;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "contraction", "proposition1", "td-equivalence", "affine-invariance",
      "dg-improvement"};
  return names;
}

SuiteResult run_suite(const std::string& name) {
  if (name == "contraction") return run_contraction_suite();
  if (name == "proposition1") return run_proposition1_suite();
  if (name == "td-equivalence") return run_td_equivalence_suite();
  if (name == "affine-invariance") return run_affine_invariance_suite();
  if (name == "dg-improvement") return run_dg_improvement_suite();
  std::ostringstream msg;
  msg << "unknown verify suite '" << name << "'; expected one of:";
  for (const auto& n : verify_suite_names()) msg << ' ' << n;
  throw ValidationError(msg.str());
}

}  // namespace odmarl
