#pragma once

#include <string>
#include <vector>

#include "odmarl/empirical.hpp"

namespace odmarl {

/// Per-agent state-action values with an in-support mask. Greedy selection
/// and state values only ever consider in-support actions; a state with no
/// in-support action has value zero.
struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;           // indexed s * n_actions + a
  std::vector<char> in_support;
  std::vector<char> terminal;      // terminal states legitimately have no support

  double value(int s, int a) const { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  void set(int s, int a, double v) { q[static_cast<std::size_t>(s) * n_actions + a] = v; }
  bool supported(int s, int a) const {
    return in_support[static_cast<std::size_t>(s) * n_actions + a] != 0;
  }

  /// max over in-support actions; 0 when none.
  double state_value(int s) const;

  /// Lowest-index maximizer among in-support actions; -1 when none.
  int greedy_action(int s) const;

  static QTable zeros(const EmpiricalModel& model);
  static QTable constant(const EmpiricalModel& model, double v);
};

// CSV rows are (state, action, q), one per in-support pair, doubles printed
// with 17 significant digits.
void write_qtable_csv(const QTable& table, const std::string& path);
QTable read_qtable_csv(const std::string& path, int n_states, int n_actions);

}  // namespace odmarl
