#pragma once

#include <string>
#include <vector>

#include "odmarl/transforms.hpp"

namespace odmarl {

/// One agent-action row of a matrix-game reference table: the next-state
/// probabilities in the reference order plus the row's expected return.
struct TableRow {
  int agent = 0;   // 0-based
  int action = 0;  // 0-based
  std::vector<std::string> outcome_labels;
  std::vector<double> probs;      // computed
  std::vector<double> ref_probs;  // reference values
  double expected_return = 0.0;
  double ref_return = 0.0;
  bool transition_pass = false;
  bool return_pass = false;
};

struct ReferenceTable {
  std::string title;
  double prob_tol = 0.0;
  double return_tol = 0.0;
  bool returns_from_displayed_probs = false;
  std::vector<TableRow> rows;
};

/// Recomputes the three matrix-game tables (offline baseline, deviation-only,
/// combined) from analytic models and checks every cell against the bundled
/// reference values. No sampling is involved. The vd_spec override exists for
/// negative-control tests (e.g. injecting clipping makes cells fail).
std::vector<ReferenceTable> reproduce_matrix_tables(const TransformSpec& vd_spec);
std::vector<ReferenceTable> reproduce_matrix_tables();

bool tables_all_pass(const std::vector<ReferenceTable>& tables);
int count_pass_cells(const std::vector<ReferenceTable>& tables);
std::string render_tables(const std::vector<ReferenceTable>& tables);

}  // namespace odmarl
