#include "odmarl/tables.hpp"

#include <cmath>
#include <sstream>

#include "odmarl/empirical.hpp"
#include "odmarl/env.hpp"
#include "format_util.hpp"

namespace odmarl {

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct RowSpec {
  int agent;
  int action;
  std::vector<int> outcomes;  // next-state ids in reference order
  std::vector<double> ref_probs;
  double ref_return;
};

struct TableSpec {
  const char* title;
  TransformMode mode;
  double prob_tol;
  double return_tol;
  bool returns_from_displayed_probs;
  std::vector<RowSpec> rows;
};

// Outcome states of the matrix game: 1 pays 1, 2 pays 5, 3 pays 6.
const std::vector<TableSpec>& table_specs() {
  static const std::vector<TableSpec> specs = {
      {"offline transition probabilities and expected returns",
       TransformMode::none, 1e-9, 1e-9, false,
       {{0, 0, {1, 2}, {0.4, 0.6}, 3.4},
        {0, 1, {3, 1}, {0.4, 0.6}, 3.0},
        {1, 0, {1, 3}, {0.8, 0.2}, 2.0},
        {1, 1, {2, 1}, {0.8, 0.2}, 4.2}}},
      // The reference returns of this table were tabulated from its
      // two-decimal probability column, so the return cell is recomputed the
      // same way (returns_from_displayed_probs).
      {"with value deviation only",
       TransformMode::vd, 0.005, 0.005, true,
       {{0, 0, {1, 2}, {0.12, 0.88}, 4.52},
        {0, 1, {3, 1}, {0.80, 0.20}, 5.0},
        {1, 0, {1, 3}, {0.40, 0.60}, 4.0},
        {1, 1, {2, 1}, {0.95, 0.05}, 4.8}}},
      {"with transition normalization and value deviation",
       TransformMode::vd_tn, 0.005, 0.005, false,
       {{0, 0, {1, 2}, {0.17, 0.83}, 4.33},
        {0, 1, {3, 1}, {0.86, 0.14}, 5.29},
        {1, 0, {1, 3}, {0.14, 0.86}, 5.29},
        {1, 1, {2, 1}, {0.83, 0.17}, 4.33}}}};
  return specs;
}

std::string outcome_label(const EnvSpec& env, int s2, int action) {
  std::ostringstream ss;
  ss << "p(" << env.reward[s2] << "|a" << action + 1 << ")";
  return ss.str();
}

}  // namespace

std::vector<ReferenceTable> reproduce_matrix_tables(const TransformSpec& vd_spec) {
  const EnvSpec env = matrix_game();
  const JointPolicy behavior = marginal_policy(env, {{0.8, 0.2}, {0.4, 0.6}});
  const double gamma = 0.99;  // one-step game: terminals make gamma irrelevant

  std::vector<EmpiricalModel> models;
  std::vector<QTable> zeros;
  for (int i = 0; i < env.n_agents; ++i) {
    models.push_back(exact_model_from_env(env, behavior, i));
    zeros.push_back(QTable::zeros(models.back()));
  }

  std::vector<ReferenceTable> tables;
  for (const TableSpec& spec : table_specs()) {
    ReferenceTable table;
    table.title = spec.title;
    table.prob_tol = spec.prob_tol;
    table.return_tol = spec.return_tol;
    table.returns_from_displayed_probs = spec.returns_from_displayed_probs;

    TransformSpec tf = vd_spec;
    tf.mode = spec.mode;

    for (const RowSpec& row_spec : spec.rows) {
      const auto& model = models[row_spec.agent];
      const auto& q = zeros[row_spec.agent];
      const WeightedSupport ws =
          modified_transitions(model, q, 0, row_spec.action, gamma, tf);

      TableRow row;
      row.agent = row_spec.agent;
      row.action = row_spec.action;
      row.ref_probs = row_spec.ref_probs;
      row.ref_return = row_spec.ref_return;

      double ret = 0.0;
      for (std::size_t k = 0; k < row_spec.outcomes.size(); ++k) {
        const int s2 = row_spec.outcomes[k];
        double p = 0.0;
        for (const auto& e : ws.entries)
          if (e.next_state == s2) p = e.modified_prob;
        row.outcome_labels.push_back(outcome_label(env, s2, row_spec.action));
        row.probs.push_back(p);
        const double u = backup_value(model, q, s2, gamma);
        ret += (spec.returns_from_displayed_probs ? round2(p) : p) * u;
      }
      row.expected_return = ret;

      row.transition_pass = true;
      for (std::size_t k = 0; k < row.probs.size(); ++k)
        row.transition_pass &=
            std::abs(row.probs[k] - row.ref_probs[k]) <= spec.prob_tol;
      row.return_pass = std::abs(row.expected_return - row.ref_return) <= spec.return_tol;
      table.rows.push_back(std::move(row));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

std::vector<ReferenceTable> reproduce_matrix_tables() {
  TransformSpec unclipped;
  unclipped.clip_enabled = false;
  return reproduce_matrix_tables(unclipped);
}

bool tables_all_pass(const std::vector<ReferenceTable>& tables) {
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      if (!r.transition_pass || !r.return_pass) return false;
  return true;
}

int count_pass_cells(const std::vector<ReferenceTable>& tables) {
  int n = 0;
  for (const auto& t : tables)
    for (const auto& r : t.rows) n += int(r.transition_pass) + int(r.return_pass);
  return n;
}

std::string render_tables(const std::vector<ReferenceTable>& tables) {
  std::ostringstream out;
  for (const auto& t : tables) {
    out << t.title << "\n";
    for (const auto& r : t.rows) {
      out << "  agent " << r.agent + 1 << "  a" << r.action + 1 << "  ";
      for (std::size_t k = 0; k < r.probs.size(); ++k) {
        out << r.outcome_labels[k] << " = " << detail::fmt_fixed(r.probs[k], 2);
        out << (k + 1 < r.probs.size() ? ", " : "");
      }
      out << "  return = " << detail::fmt_fixed(r.expected_return, 2);
      out << "  [transition " << (r.transition_pass ? "PASS" : "FAIL") << "]";
      out << " [return " << (r.return_pass ? "PASS" : "FAIL") << "]\n";
    }
  }
  out << count_pass_cells(tables) << "/24 cells PASS\n";
  return out.str();
}

}  // namespace odmarl
