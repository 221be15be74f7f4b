#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odmarl/analysis.hpp"
#include "odmarl/error.hpp"
#include "odmarl/learner.hpp"

using namespace odmarl;

namespace {

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

}  // namespace

TEST_CASE("joint evaluation of the modified and unmodified matrix policies") {
  const EnvSpec env = matrix_game();

  const auto combined = matrix_tables(TransformMode::vd_tn);
  const std::vector<std::vector<int>> optimal = {greedy_policy(combined[0]),
                                                 greedy_policy(combined[1])};
  const EvalReport good = evaluate_joint(env, optimal, 200, 9);
  CHECK(good.mean_return == 6.0);
  CHECK(good.std_return == 0.0);  // deterministic env and policies

  const auto unmodified = matrix_tables(TransformMode::none);
  const std::vector<std::vector<int>> baseline = {greedy_policy(unmodified[0]),
                                                  greedy_policy(unmodified[1])};
  const EvalReport poor = evaluate_joint(env, baseline, 200, 9);
  CHECK(poor.mean_return == 5.0);
}

TEST_CASE("joint evaluation is bit-reproducible for a fixed seed") {
  const EnvSpec env = random_mdp(5, 2, 2, 1.0, 5.0, 3, 8);
  const JointPolicy behavior = uniform_policy(env);
  std::vector<std::vector<int>> policies(2, std::vector<int>(5, 0));
  const EvalReport a = evaluate_joint(env, policies, 300, 42);
  const EvalReport b = evaluate_joint(env, policies, 300, 42);
  CHECK(a.mean_return == b.mean_return);
  CHECK(a.std_return == b.std_return);
  const EvalReport c = evaluate_joint(env, policies, 300, 43);
  CHECK(a.mean_return != c.mean_return);
}

TEST_CASE("value consensus basics") {
  QTable lo;
  lo.n_states = 1;
  lo.n_actions = 1;
  lo.q = {3.0};
  lo.in_support = {1};
  lo.terminal = {0};
  QTable hi = lo;
  hi.q = {5.0};

  CHECK(value_consensus({lo, lo}, {0}) == 0.0);
  CHECK(value_consensus({lo, hi}, {0}) == 2.0);
  // symmetric in the agents
  CHECK(value_consensus({lo, hi}, {0}) == value_consensus({hi, lo}, {0}));
  CHECK_THROWS_AS(value_consensus({lo}, {0}), ValidationError);
  CHECK_THROWS_AS(value_consensus({lo, hi}, {}), ValidationError);
}

TEST_CASE("the combined modification builds consensus on the matrix game") {
  const std::vector<int> states = {0, 1, 2, 3};
  const double combined = value_consensus(matrix_tables(TransformMode::vd_tn), states);
  const double vd_only = value_consensus(matrix_tables(TransformMode::vd), states);
  CHECK(combined < vd_only);
  CHECK(combined == doctest::Approx(0.0).epsilon(1e-12));
  // deviation alone leaves the agents disagreeing: 5.0 vs 101/21
  CHECK(vd_only == doctest::Approx((5.0 - 101.0 / 21.0) / 4.0).epsilon(1e-9));
}

TEST_CASE("state subset sampling is uniform without replacement") {
  const auto all = sample_states(7, 100, 5);
  CHECK(all.size() == 7);
  auto some = sample_states(500, 100, 5);
  CHECK(some.size() == 100);
  std::sort(some.begin(), some.end());
  CHECK(std::unique(some.begin(), some.end()) == some.end());
  CHECK(sample_states(500, 100, 5) == sample_states(500, 100, 5));
}

TEST_CASE("extrapolation error of the combined policies on the matrix game") {
  const EnvSpec env = matrix_game();
  const auto tables = matrix_tables(TransformMode::vd_tn);
  const std::vector<std::vector<int>> policies = {greedy_policy(tables[0]),
                                                  greedy_policy(tables[1])};
  // both agents estimate 37/7 at the start while execution returns 6
  const double err = extrapolation_error(env, policies, tables, 100, 3, 0.99);
  CHECK(err == doctest::Approx(6.0 - 37.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("oracle tables that match the true return have zero extrapolation error") {
  const EnvSpec env = matrix_game();
  auto tables = matrix_tables(TransformMode::vd_tn);
  // overwrite the greedy entries with the true executed return
  tables[0].set(0, 1, 6.0);
  tables[1].set(0, 0, 6.0);
  const std::vector<std::vector<int>> policies = {greedy_policy(tables[0]),
                                                  greedy_policy(tables[1])};
  REQUIRE(policies[0][0] == 1);
  REQUIRE(policies[1][0] == 0);
  CHECK(extrapolation_error(env, policies, tables, 50, 3, 0.99) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("matched-transition constructions agree on state values") {
  const EnvSpec tmpl = make_episodic_template(6, 3, 2, 91);
  const double gap = proposition1_check(tmpl, 2, 92, false);
  CHECK(gap < 1e-8);
}

TEST_CASE("mismatched greedy transitions break the value agreement") {
  const EnvSpec tmpl = make_episodic_template(6, 3, 2, 93);
  const double gap = proposition1_check(tmpl, 2, 94, true);
  CHECK(gap > 1e-4);
}

TEST_CASE("identical models produce an exactly zero spread") {
  // degenerate check: with one agent the spread over agents is trivially zero,
  // so run two agents on the same seed stream and require bitwise agreement
  const EnvSpec tmpl = make_episodic_template(7, 2, 2, 95);
  CHECK(proposition1_check(tmpl, 2, 96, false) == 0.0);
}

TEST_CASE("eval report rows serialize deterministically") {
  EvalReport report;
  report.mean_return = 6.0;
  report.std_return = 0.0;
  report.n_episodes = 10;
  report.metrics["value_consensus"] = 0.25;
  std::ostringstream a, b;
  append_eval_csv(a, "runX", report);
  append_eval_csv(b, "runX", report);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("runX,mean_return,6") != std::string::npos);
  CHECK(a.str().find("runX,value_consensus,0.25") != std::string::npos);
}
