#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odmarl/error.hpp"
#include "odmarl/transforms.hpp"

using namespace odmarl;

namespace {

EmpiricalModel matrix_exact(int agent) {
  const EnvSpec env = matrix_game();
  const JointPolicy behavior = marginal_policy(env, {{0.8, 0.2}, {0.4, 0.6}});
  return exact_model_from_env(env, behavior, agent);
}

TransformSpec spec_of(TransformMode mode) {
  TransformSpec spec;
  spec.mode = mode;
  return spec;
}

// Random positive-reward models with random supports and a random positive
// value table, for the property checks.
struct RandomCase {
  EmpiricalModel model;
  QTable q;
  std::vector<std::pair<int, int>> visited;
};

RandomCase random_case(std::uint64_t seed) {
  Rng rng(seed);
  const int n_states = 3 + rng.uniform_int(6);
  const int n_actions = 1 + rng.uniform_int(3);

  RandomCase rc;
  auto& m = rc.model;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.mass.assign(n_states, std::vector<SparseRow>(n_actions));
  m.visit.assign(n_states, std::vector<double>(n_actions, 0.0));
  m.reward_of_state.resize(n_states);
  m.reward_known.assign(n_states, 1);
  m.terminal.assign(n_states, 0);
  for (int s = 0; s < n_states; ++s) m.reward_of_state[s] = rng.uniform(0.5, 4.0);

  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      if (rng.uniform01() < 0.2) continue;  // leave some pairs unvisited
      const int support_size = 1 + rng.uniform_int(std::min(4, n_states));
      SparseRow row;
      int s2 = rng.uniform_int(n_states);
      for (int k = 0; k < support_size; ++k) {
        row.emplace_back((s2 + k * 2 + 1) % n_states, rng.uniform(0.1, 5.0));
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end(),
                            [](const auto& x, const auto& y) { return x.first == y.first; }),
                row.end());
      double total = 0.0;
      for (const auto& [id, w] : row) total += w;
      m.mass[s][a] = row;
      m.visit[s][a] = total;
      rc.visited.emplace_back(s, a);
    }

  rc.q = QTable::zeros(m);
  for (const auto& [s, a] : rc.visited) rc.q.set(s, a, rng.uniform(0.0, 5.0));
  return rc;
}

}  // namespace

TEST_CASE("backup value of a terminal is its entry reward") {
  const EmpiricalModel m = matrix_exact(0);
  const QTable q = QTable::zeros(m);
  CHECK(backup_value(m, q, 3, 0.99) == 6.0);
  CHECK(backup_value(m, q, 3, 0.1) == 6.0);
}

TEST_CASE("backup value bootstraps through the best in-support action") {
  EmpiricalModel m;
  m.n_states = 2;
  m.n_actions = 2;
  m.mass.assign(2, std::vector<SparseRow>(2));
  m.visit.assign(2, std::vector<double>(2, 0.0));
  m.mass[1] = {{{0, 1.0}}, {{0, 1.0}}};
  m.visit[1] = {1.0, 1.0};
  m.reward_of_state = {0.0, 1.0};
  m.reward_known = {1, 1};
  m.terminal = {0, 0};
  QTable q = QTable::zeros(m);
  q.set(1, 0, 2.0);
  q.set(1, 1, 3.0);
  CHECK(backup_value(m, q, 1, 0.99) == doctest::Approx(1.0 + 0.99 * 3.0).epsilon(1e-15));
  // a state with no in-support action is terminal-valued
  CHECK(backup_value(m, q, 0, 0.99) == 0.0);
}

TEST_CASE("expected backup reproduces the one-step expected returns") {
  const QTable q1 = QTable::zeros(matrix_exact(0));
  CHECK(expected_backup(matrix_exact(0), q1, 0, 0, 0.99) ==
        doctest::Approx(3.4).epsilon(1e-12));
  const EmpiricalModel m2 = matrix_exact(1);
  const QTable q2 = QTable::zeros(m2);
  CHECK(expected_backup(m2, q2, 0, 1, 0.99) == doctest::Approx(4.2).epsilon(1e-12));
  CHECK_THROWS_AS(expected_backup(m2, q2, 1, 0, 0.99), NoDataError);
}

TEST_CASE("deviation weights for the matrix game first row") {
  const EmpiricalModel m = matrix_exact(0);
  const QTable q = QTable::zeros(m);
  const SparseRow vd = value_deviation(m, q, 0, 0, 0.99, spec_of(TransformMode::vd));
  REQUIRE(vd.size() == 2);
  CHECK(vd[0].first == 1);
  CHECK(vd[0].second == doctest::Approx(5.0 / 17.0).epsilon(1e-12));  // 1 - 2.4/3.4
  CHECK(vd[1].first == 2);
  CHECK(vd[1].second == doctest::Approx(25.0 / 17.0).epsilon(1e-12));  // 1 + 1.6/3.4
}

TEST_CASE("constant backup over the support gives unit weights") {
  EmpiricalModel m;
  m.n_states = 3;
  m.n_actions = 1;
  m.mass.assign(3, std::vector<SparseRow>(1));
  m.visit.assign(3, std::vector<double>(1, 0.0));
  m.mass[0][0] = {{1, 0.3}, {2, 0.7}};
  m.visit[0][0] = 1.0;
  m.reward_of_state = {0.0, 2.5, 2.5};
  m.reward_known = {1, 1, 1};
  m.terminal = {0, 1, 1};
  const QTable q = QTable::zeros(m);
  for (const auto& [s2, lambda] :
       value_deviation(m, q, 0, 0, 0.9, spec_of(TransformMode::vd)))
    CHECK(lambda == doctest::Approx(1.0).epsilon(1e-12));
  // and the modified distribution is the offline one
  const WeightedSupport ws =
      modified_transitions(m, q, 0, 0, 0.9, spec_of(TransformMode::vd));
  CHECK(ws.entries[0].modified_prob == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(ws.entries[1].modified_prob == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("clipping clamps to the optimism interval") {
  const EmpiricalModel m = matrix_exact(0);
  const QTable q = QTable::zeros(m);
  TransformSpec spec = spec_of(TransformMode::vd);
  spec.clip_enabled = true;
  spec.epsilon = 0.5;
  // agent 1, second action: raw weights are 2.0 and 1/3
  const SparseRow vd = value_deviation(m, q, 0, 1, 0.99, spec);
  CHECK(vd[1].second == doctest::Approx(1.5).epsilon(1e-12));   // 2.0 clamped
  CHECK(vd[0].second == doctest::Approx(0.5).epsilon(1e-12));   // 1/3 raised to 1 - eps
  // the unclipped 1.4706 on the first action stays inside the interval
  const SparseRow vd0 = value_deviation(m, q, 0, 0, 0.99, spec);
  CHECK(vd0[1].second == doctest::Approx(25.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("degenerate expectation is an error, not a fallback") {
  EmpiricalModel m;
  m.n_states = 2;
  m.n_actions = 1;
  m.mass.assign(2, std::vector<SparseRow>(1));
  m.visit.assign(2, std::vector<double>(1, 0.0));
  m.mass[0][0] = {{1, 1.0}};
  m.visit[0][0] = 1.0;
  m.reward_of_state = {0.0, 0.0};
  m.reward_known = {1, 1};
  m.terminal = {0, 1};
  const QTable q = QTable::zeros(m);
  CHECK_THROWS_AS(value_deviation(m, q, 0, 0, 0.9, spec_of(TransformMode::vd)),
                  DegenerateValueError);
  CHECK_THROWS_AS(modified_transitions(m, q, 0, 0, 0.9, spec_of(TransformMode::vd_tn)),
                  DegenerateValueError);
}

TEST_CASE("normalization weights are reciprocal offline probabilities") {
  const EmpiricalModel m = matrix_exact(0);
  const SparseRow tn = transition_normalization(m, 0, 0);
  CHECK(tn[0].second == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(tn[1].second == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(transition_normalization(m, 1, 0), NoDataError);

  // uniform support of size k gives k everywhere; singletons give 1
  EmpiricalModel u;
  u.n_states = 4;
  u.n_actions = 1;
  u.mass.assign(4, std::vector<SparseRow>(1));
  u.visit.assign(4, std::vector<double>(1, 0.0));
  u.mass[0][0] = {{1, 1.0}, {2, 1.0}, {3, 1.0}};
  u.visit[0][0] = 3.0;
  u.mass[1][0] = {{2, 7.0}};
  u.visit[1][0] = 7.0;
  u.reward_of_state = {1, 1, 1, 1};
  u.reward_known.assign(4, 1);
  u.terminal.assign(4, 0);
  for (const auto& [s2, lambda] : transition_normalization(u, 0, 0))
    CHECK(lambda == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(transition_normalization(u, 1, 0)[0].second == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("modified distributions match the hand-computed matrix game tables") {
  const EmpiricalModel agent1 = matrix_exact(0);
  const EmpiricalModel agent2 = matrix_exact(1);
  const QTable q1 = QTable::zeros(agent1);
  const QTable q2 = QTable::zeros(agent2);

  auto prob_of = [](const WeightedSupport& ws, int s2) {
    for (const auto& e : ws.entries)
      if (e.next_state == s2) return e.modified_prob;
    return -1.0;
  };
  auto ret_of = [&](const WeightedSupport& ws, const EmpiricalModel& m, const QTable& q) {
    double r = 0.0;
    for (const auto& e : ws.entries)
      r += e.modified_prob * backup_value(m, q, e.next_state, 0.99);
    return r;
  };

  SUBCASE("deviation only") {
    const auto spec = spec_of(TransformMode::vd);
    const WeightedSupport a1 = modified_transitions(agent1, q1, 0, 0, 0.99, spec);
    CHECK(prob_of(a1, 1) == doctest::Approx(2.0 / 17.0).epsilon(1e-12));
    CHECK(prob_of(a1, 2) == doctest::Approx(15.0 / 17.0).epsilon(1e-12));
    CHECK(ret_of(a1, agent1, q1) == doctest::Approx(77.0 / 17.0).epsilon(1e-12));

    const WeightedSupport a2 = modified_transitions(agent2, q2, 0, 1, 0.99, spec);
    CHECK(prob_of(a2, 2) == doctest::Approx(20.0 / 21.0).epsilon(1e-12));
    CHECK(prob_of(a2, 1) == doctest::Approx(1.0 / 21.0).epsilon(1e-12));
    CHECK(ret_of(a2, agent2, q2) == doctest::Approx(101.0 / 21.0).epsilon(1e-12));
  }

  SUBCASE("combined") {
    const auto spec = spec_of(TransformMode::vd_tn);
    const WeightedSupport a1 = modified_transitions(agent1, q1, 0, 0, 0.99, spec);
    CHECK(prob_of(a1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(prob_of(a1, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(ret_of(a1, agent1, q1) == doctest::Approx(13.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("normalization only gives the uniform support distribution") {
    const WeightedSupport ws =
        modified_transitions(agent1, q1, 0, 0, 0.99, spec_of(TransformMode::tn));
    CHECK(prob_of(ws, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(prob_of(ws, 2) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("mode none returns the offline distribution") {
    const WeightedSupport ws =
        modified_transitions(agent1, q1, 0, 0, 0.99, spec_of(TransformMode::none));
    CHECK(prob_of(ws, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(prob_of(ws, 2) == doctest::Approx(0.6).epsilon(1e-15));
  }
}

TEST_CASE("property: modified distributions are distributions in every mode") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const RandomCase rc = random_case(mix_seed(0xABC, seed));
    for (const TransformMode mode : {TransformMode::none, TransformMode::vd,
                                     TransformMode::tn, TransformMode::vd_tn}) {
      for (const auto& [s, a] : rc.visited) {
        const WeightedSupport ws =
            modified_transitions(rc.model, rc.q, s, a, 0.9, spec_of(mode));
        double sum = 0.0;
        for (const auto& e : ws.entries) {
          CHECK(e.modified_prob >= 0.0);
          sum += e.modified_prob;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        ++checked;
      }
    }
  }
  CHECK(checked > 4000);
}

TEST_CASE("property: combined unclipped weights are value-proportional") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200 || checked < 1000; ++seed) {
    const RandomCase rc = random_case(mix_seed(0xBCD, seed));
    for (const auto& [s, a] : rc.visited) {
      const WeightedSupport ws =
          modified_transitions(rc.model, rc.q, s, a, 0.9, spec_of(TransformMode::vd_tn));
      double total_u = 0.0;
      for (const auto& e : ws.entries)
        total_u += backup_value(rc.model, rc.q, e.next_state, 0.9);
      for (const auto& e : ws.entries) {
        const double expected = backup_value(rc.model, rc.q, e.next_state, 0.9) / total_u;
        CHECK(std::abs(e.modified_prob - expected) < 1e-12);
        ++checked;
      }
    }
    if (seed > 2000) break;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("property: unclipped deviation preserves the backup-value order") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const RandomCase rc = random_case(mix_seed(0xCDE, seed));
    for (const auto& [s, a] : rc.visited) {
      const WeightedSupport ws =
          modified_transitions(rc.model, rc.q, s, a, 0.9, spec_of(TransformMode::vd));
      for (std::size_t i = 0; i < ws.entries.size(); ++i)
        for (std::size_t j = 0; j < ws.entries.size(); ++j) {
          const double ui = backup_value(rc.model, rc.q, ws.entries[i].next_state, 0.9);
          const double uj = backup_value(rc.model, rc.q, ws.entries[j].next_state, 0.9);
          if (ui > uj + 1e-9)
            CHECK(ws.entries[i].modified_prob / ws.entries[i].p_offline >
                  ws.entries[j].modified_prob / ws.entries[j].p_offline);
        }
    }
  }
}

TEST_CASE("property: clipped weights stay inside the optimism interval") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const RandomCase rc = random_case(mix_seed(0xDEF, seed));
    TransformSpec spec = spec_of(TransformMode::vd);
    spec.clip_enabled = true;
    spec.epsilon = 0.25 + 0.5 * (seed % 3);
    for (const auto& [s, a] : rc.visited) {
      for (const auto& [s2, lambda] : value_deviation(rc.model, rc.q, s, a, 0.9, spec)) {
        CHECK(lambda >= std::max(1.0 - spec.epsilon, spec.value_floor) - 1e-15);
        CHECK(lambda <= 1.0 + spec.epsilon + 1e-15);
      }
    }
  }
}

TEST_CASE("sample weights agree with the weighted support entries") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RandomCase rc = random_case(mix_seed(0xEF0, seed));
    for (const TransformMode mode : {TransformMode::none, TransformMode::vd,
                                     TransformMode::tn, TransformMode::vd_tn}) {
      for (const auto& [s, a] : rc.visited) {
        const WeightedSupport ws =
            modified_transitions(rc.model, rc.q, s, a, 0.9, spec_of(mode));
        for (const auto& e : ws.entries) {
          const double w =
              sample_weight(rc.model, rc.q, s, a, e.next_state, 0.9, spec_of(mode));
          CHECK(w == doctest::Approx(e.lambda_tn * e.lambda_vd).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("the literal value-deviation flag degenerates on terminal-only supports") {
  // all matrix-game successors are terminals with zero state value, so the
  // bare-value form has a zero expectation; this is why the default form
  // backs up reward plus discounted value
  const EmpiricalModel m = matrix_exact(0);
  const QTable q = QTable::zeros(m);
  TransformSpec spec = spec_of(TransformMode::vd);
  spec.literal_value_deviation = true;
  CHECK_THROWS_AS(value_deviation(m, q, 0, 0, 0.99, spec), DegenerateValueError);
}
