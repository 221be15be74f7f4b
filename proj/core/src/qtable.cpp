#include "odmarl/qtable.hpp"

#include <fstream>
#include <sstream>

#include "odmarl/error.hpp"
#include "format_util.hpp"

namespace odmarl {

double QTable::state_value(int s) const {
  double best = 0.0;
  bool any = false;
  for (int a = 0; a < n_actions; ++a) {
    if (!supported(s, a)) continue;
    const double v = value(s, a);
    if (!any || v > best) best = v;
    any = true;
  }
  return any ? best : 0.0;
}

int QTable::greedy_action(int s) const {
  int best = -1;
  double best_v = 0.0;
  for (int a = 0; a < n_actions; ++a) {
    if (!supported(s, a)) continue;
    const double v = value(s, a);
    if (best < 0 || v > best_v) {
      best = a;
      best_v = v;
    }
  }
  return best;
}

QTable QTable::zeros(const EmpiricalModel& model) { return constant(model, 0.0); }

QTable QTable::constant(const EmpiricalModel& model, double v) {
  QTable t;
  t.n_states = model.n_states;
  t.n_actions = model.n_actions;
  t.q.assign(static_cast<std::size_t>(t.n_states) * t.n_actions, 0.0);
  t.in_support.assign(t.q.size(), 0);
  t.terminal.assign(model.terminal.begin(), model.terminal.end());
  for (int s = 0; s < t.n_states; ++s)
    for (int a = 0; a < t.n_actions; ++a)
      if (model.visited(s, a)) {
        t.set(s, a, v);
        t.in_support[static_cast<std::size_t>(s) * t.n_actions + a] = 1;
      }
  return t;
}

void write_qtable_csv(const QTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "state,action,q\n";
  for (int s = 0; s < table.n_states; ++s)
    for (int a = 0; a < table.n_actions; ++a)
      if (table.supported(s, a))
        out << s << ',' << a << ',' << detail::fmt_g17(table.value(s, a)) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

QTable read_qtable_csv(const std::string& path, int n_states, int n_actions) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  QTable table;
  table.n_states = n_states;
  table.n_actions = n_actions;
  table.q.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
  table.in_support.assign(table.q.size(), 0);
  table.terminal.assign(n_states, 0);

  std::string line;
  if (!std::getline(in, line) || line != "state,action,q")
    throw IoError(path + ": missing qtable header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int s = 0, a = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> s >> c1 >> a >> c2 >> v) || c1 != ',' || c2 != ',')
      throw IoError(path + ": line " + std::to_string(line_no) + ": malformed row");
    if (s < 0 || s >= n_states || a < 0 || a >= n_actions)
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": id outside declared shape");
    table.set(s, a, v);
    table.in_support[static_cast<std::size_t>(s) * n_actions + a] = 1;
  }
  // rowless states are never stepped from; treat them like terminals
  for (int s = 0; s < n_states; ++s) {
    bool any = false;
    for (int a = 0; a < n_actions; ++a) any |= table.supported(s, a);
    if (!any) table.terminal[s] = 1;
  }
  return table;
}

}  // namespace odmarl
