// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "odmarl/analysis.hpp"
#include "odmarl/empirical.hpp"
#include "odmarl/error.hpp"
#include "odmarl/learner.hpp"
#include "odmarl/tables.hpp"
#include "odmarl/verify.hpp"

using namespace odmarl;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> body;
  double time_limit_s = 0.0;  // 0 = no limit
};

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

EmpiricalModel matrix_exact(int agent) {
  const EnvSpec env = matrix_game();
  const JointPolicy behavior = marginal_policy(env, {{0.8, 0.2}, {0.4, 0.6}});
  return exact_model_from_env(env, behavior, agent);
}

std::vector<QTable> matrix_tables(TransformMode mode) {
  LearnConfig config;
  config.gamma = 0.99;
  config.tol = 1e-12;
  config.max_sweeps = 100;
  config.transform.mode = mode;
  return {modified_value_iteration(matrix_exact(0), config),
          modified_value_iteration(matrix_exact(1), config)};
}

bool check_table(const ReferenceTable& table, std::string& detail) {
  for (const auto& row : table.rows) {
    if (!row.transition_pass || !row.return_pass) {
      detail = "agent " + std::to_string(row.agent + 1) + " a" +
               std::to_string(row.action + 1) + " cell mismatch (return " +
               std::to_string(row.expected_return) + " vs " +
               std::to_string(row.ref_return) + ")";
      return false;
    }
  }
  return true;
}

// Randomized one-step cooperative game with payoffs uniform in [1, 5]; each
// joint action reaches its own terminal outcome.
EnvSpec random_one_step_game(int n_actions, std::uint64_t seed) {
  Rng rng(seed);
  EnvSpec env;
  env.name = "random_one_step_game";
  env.n_agents = 2;
  const int n_joint = n_actions * n_actions;
  env.n_states = 1 + n_joint;
  env.actions_per_agent = {n_actions, n_actions};
  env.horizon = 1;
  env.reward.assign(env.n_states, 0.0);
  env.terminal.assign(env.n_states, 0);
  for (int j = 0; j < n_joint; ++j) {
    env.reward[1 + j] = rng.uniform(1.0, 5.0);
    env.terminal[1 + j] = 1;
  }
  env.transition.resize(env.n_states);
  env.transition[0].resize(n_joint);
  for (int j = 0; j < n_joint; ++j) env.transition[0][j] = {{1 + j, 1.0}};
  env.initial = {{0, 1.0}};
  env.validate();
  return env;
}

// Poorly performing behavior: most of the mass on each agent's myopically
// worst action under a uniform opponent.
JointPolicy poor_behavior(const EnvSpec& env, double skew) {
  const JointPolicy uniform = uniform_policy(env);
  JointPolicy poor = uniform;
  for (int i = 0; i < env.n_agents; ++i) {
    const EmpiricalModel m = exact_model_from_env(env, uniform, i);
    int worst = 0;
    double worst_value = 1e300;
    for (int a = 0; a < env.actions_per_agent[i]; ++a) {
      double v = 0.0;
      for (const auto& [s2, w] : m.support(0, a))
        v += w / m.visit[0][a] * env.reward[s2];
      if (v < worst_value) {
        worst_value = v;
        worst = a;
      }
    }
    const int n = env.actions_per_agent[i];
    for (int a = 0; a < n; ++a)
      poor.probs[i][0][a] = a == worst ? skew : (1.0 - skew) / (n - 1);
  }
  return poor;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria;

  criteria.push_back({"1 matrix-game baseline table (analytic, tol 1e-9)",
                      [](std::string& detail) {
                        return check_table(reproduce_matrix_tables()[0], detail);
                      },
                      1.0});

  criteria.push_back({"2 value-deviation table (tol 0.005)",
                      [](std::string& detail) {
                        return check_table(reproduce_matrix_tables()[1], detail);
                      },
                      1.0});

  criteria.push_back(
      {"3 combined table, greedy joint policy and execution returns",
       [](std::string& detail) {
         if (!check_table(reproduce_matrix_tables()[2], detail)) return false;

         const EnvSpec env = matrix_game();
         const auto combined = matrix_tables(TransformMode::vd_tn);
         const std::vector<std::vector<int>> optimal = {greedy_policy(combined[0]),
                                                        greedy_policy(combined[1])};
         if (optimal[0][0] != 1 || optimal[1][0] != 0) {
           detail = "combined greedy policy is not (a2, a1)";
           return false;
         }
         const double good = evaluate_joint(env, optimal, 100, 5).mean_return;
         const auto unmodified = matrix_tables(TransformMode::none);
         const std::vector<std::vector<int>> baseline = {greedy_policy(unmodified[0]),
                                                         greedy_policy(unmodified[1])};
         const double poor = evaluate_joint(env, baseline, 100, 5).mean_return;
         if (!approx(good, 6.0, 1e-12) || !approx(poor, 5.0, 1e-12)) {
           detail = "execution returns " + std::to_string(good) + " / " +
                    std::to_string(poor) + ", expected 6 / 5";
           return false;
         }
         return true;
       }});

  criteria.push_back({"4 contraction under the combined modification (200 MDPs)",
                      [](std::string& detail) {
                        const SuiteResult r = run_contraction_suite();
                        if (!r.passed && !r.notes.empty()) detail = r.notes.front();
                        return r.passed;
                      },
                      60.0});

  criteria.push_back({"5 shared-transition value agreement (100 + 100 cases)",
                      [](std::string& detail) {
                        const SuiteResult r = run_proposition1_suite();
                        if (!r.passed && !r.notes.empty()) detail = r.notes.front();
                        return r.passed;
                      },
                      60.0});

  criteria.push_back({"6 weighted TD matches exact value iteration (sup norm 0.05)",
                      [](std::string& detail) {
                        const SuiteResult r = run_td_equivalence_suite();
                        if (!r.passed && !r.notes.empty()) detail = r.notes.front();
                        return r.passed;
                      },
                      120.0});

  criteria.push_back({"7 greedy policies invariant under affine reward rescale",
                      [](std::string& detail) {
                        const SuiteResult r = run_affine_invariance_suite();
                        if (!r.passed && !r.notes.empty()) detail = r.notes.front();
                        return r.passed;
                      }});

  criteria.push_back({"8 differential-game improvement (paired sign test, 20 seeds)",
                      [](std::string& detail) {
                        const SuiteResult r = run_dg_improvement_suite();
                        if (!r.notes.empty()) detail = r.notes.back();
                        return r.passed;
                      },
                      300.0});

  criteria.push_back(
      {"9 diagnostic metric definitions (consensus and extrapolation error)",
       [](std::string& detail) {
         // value consensus: zero for identical estimates, the spread otherwise,
         // and lower under the combined modification than under deviation alone
         const std::vector<int> states = {0, 1, 2, 3};
         const auto combined = matrix_tables(TransformMode::vd_tn);
         const auto vd_only = matrix_tables(TransformMode::vd);
         if (value_consensus({combined[0], combined[0]}, states) != 0.0) {
           detail = "consensus of identical tables is not zero";
           return false;
         }
         if (!(value_consensus(combined, states) < value_consensus(vd_only, states))) {
           detail = "combined modification did not lower the consensus gap";
           return false;
         }

         // extrapolation error: |mean greedy Q at the start - true return|
         const EnvSpec env = matrix_game();
         const std::vector<std::vector<int>> policies = {greedy_policy(combined[0]),
                                                         greedy_policy(combined[1])};
         const double err = extrapolation_error(env, policies, combined, 50, 3, 0.99);
         if (!approx(err, 6.0 - 37.0 / 7.0, 1e-9)) {
           detail = "matrix-game extrapolation error " + std::to_string(err);
           return false;
         }

         // directional: on randomized one-step games with poor behavior, the
         // unmodified learner's extrapolation error exceeds the combined
         // learner's, averaged over 20 paired seeds
         double err_none = 0.0;
         double err_combined = 0.0;
         for (int k = 0; k < 20; ++k) {
           const EnvSpec game = random_one_step_game(2, mix_seed(0xD1CE, k));
           const JointPolicy behavior = poor_behavior(game, 0.9);
           std::vector<EmpiricalModel> models;
           for (int i = 0; i < 2; ++i)
             models.push_back(exact_model_from_env(game, behavior, i));
           auto run = [&](TransformMode mode) {
             LearnConfig config;
             config.gamma = 0.9;
             config.tol = 1e-12;
             config.max_sweeps = 100;
             config.transform.mode = mode;
             std::vector<QTable> tables;
             std::vector<std::vector<int>> pols;
             for (const auto& m : models) {
               tables.push_back(modified_value_iteration(m, config));
               pols.push_back(greedy_policy(tables.back()));
             }
             return extrapolation_error(game, pols, tables, 50, mix_seed(0xFACE, k), 0.9);
           };
           err_none += run(TransformMode::none);
           err_combined += run(TransformMode::vd_tn);
         }
         if (!(err_none > err_combined)) {
           detail = "directional check failed: mean errors " +
                    std::to_string(err_none / 20) + " vs " +
                    std::to_string(err_combined / 20);
           return false;
         }
         detail = "external benchmark tables are out of scope; definitions verified";
         return true;
       }});

  int failures = 0;
  for (auto& criterion : criteria) {
    const double start = now_s();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed = now_s() - start;
    if (ok && criterion.time_limit_s > 0.0 && elapsed > criterion.time_limit_s) {
      ok = false;
      detail = "over the " + std::to_string(criterion.time_limit_s) + " s budget";
    }
    std::printf("[%s] criterion %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL",
                criterion.name.c_str(), elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
