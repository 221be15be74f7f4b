#pragma once

#include <vector>

#include "odmarl/empirical.hpp"
#include "odmarl/qtable.hpp"

namespace odmarl {

enum class TransformMode { none, vd, tn, vd_tn };

TransformMode parse_transform_mode(const std::string& name);
std::string to_string(TransformMode mode);

/// Selects and parameterizes the transition modification.
///
/// epsilon is the optimism level: with clipping enabled, each deviation
/// weight is clamped to [1 - epsilon, 1 + epsilon]. Clipping is off by
/// default; the exact tabular tables are only reproduced unclipped.
/// value_floor guards against vanishing expectations and masses.
struct TransformSpec {
  TransformMode mode = TransformMode::none;
  double epsilon = 0.0;
  bool clip_enabled = false;
  double value_floor = 1e-8;
  /// Sensitivity switch: deviations computed on the bare next-state value
  /// instead of reward-plus-discounted-value. Degenerate on terminal-only
  /// supports, which is why it is not the default.
  bool literal_value_deviation = false;
};

/// One modified next-state distribution for a (state, action) pair, with the
/// per-successor weights that produced it. modified_prob sums to one.
struct WeightedEntry {
  int next_state = 0;
  double p_offline = 0.0;
  double lambda_tn = 1.0;
  double lambda_vd = 1.0;
  double modified_prob = 0.0;
};

struct WeightedSupport {
  int state = 0;
  int action = 0;
  double normalizer = 0.0;  // sum of unnormalized masses
  std::vector<WeightedEntry> entries;  // sorted by next state
};

/// Backup value of landing in s2: reward on entry plus discounted value of
/// the best in-support action there. Terminal-valued (reward only) when s2
/// has no in-support action.
double backup_value(const EmpiricalModel& model, const QTable& q, int s2, double gamma);

/// Expectation of backup_value over the offline next-state distribution of
/// (s, a). Throws NoDataError when (s, a) is unvisited.
double expected_backup(const EmpiricalModel& model, const QTable& q, int s, int a,
                       double gamma);

/// Deviation weights over the support of (s, a):
///   lambda(s2) = 1 + (U(s2) - E[U]) / |E[U]|
/// clamped to [1 - epsilon, 1 + epsilon] when clipping is enabled, then
/// floored at value_floor. Throws DegenerateValueError when |E[U]| is below
/// the floor.
SparseRow value_deviation(const EmpiricalModel& model, const QTable& q, int s, int a,
                          double gamma, const TransformSpec& spec);

/// Normalization weights 1 / P(s2 | s, a) over the support of (s, a).
SparseRow transition_normalization(const EmpiricalModel& model, int s, int a);

/// The modified next-state distribution: offline probabilities multiplied by
/// the weights the mode selects, renormalized. Mode none returns the offline
/// distribution unchanged.
WeightedSupport modified_transitions(const EmpiricalModel& model, const QTable& q,
                                     int s, int a, double gamma,
                                     const TransformSpec& spec);

/// Product of the active weights for one sampled successor; this is the
/// per-sample objective weight of the TD path.
double sample_weight(const EmpiricalModel& model, const QTable& q, int s, int a,
                     int s2, double gamma, const TransformSpec& spec);

}  // namespace odmarl
