#include "odmarl/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "odmarl/error.hpp"
#include "format_util.hpp"

namespace odmarl {

TransformMode parse_transform_mode(const std::string& name) {
  if (name == "none") return TransformMode::none;
  if (name == "vd") return TransformMode::vd;
  if (name == "tn") return TransformMode::tn;
  if (name == "vd_tn") return TransformMode::vd_tn;
  throw ValidationError("unknown transform mode '" + name + "'");
}

std::string to_string(TransformMode mode) {
  switch (mode) {
    case TransformMode::none: return "none";
    case TransformMode::vd: return "vd";
    case TransformMode::tn: return "tn";
    case TransformMode::vd_tn: return "vd_tn";
  }
  return "?";
}

namespace {

bool uses_vd(TransformMode m) {
  return m == TransformMode::vd || m == TransformMode::vd_tn;
}
bool uses_tn(TransformMode m) {
  return m == TransformMode::tn || m == TransformMode::vd_tn;
}

double next_state_value(const EmpiricalModel& model, const QTable& q, int s2,
                        double gamma, bool literal) {
  const double v = q.state_value(s2);  // 0 for states with no in-support action
  if (literal) return v;
  return model.state_reward(s2) + gamma * v;
}

double clip_and_floor(double lambda, const TransformSpec& spec) {
  if (spec.clip_enabled)
    lambda = std::clamp(lambda, 1.0 - spec.epsilon, 1.0 + spec.epsilon);
  return std::max(lambda, spec.value_floor);
}

}  // namespace

double backup_value(const EmpiricalModel& model, const QTable& q, int s2, double gamma) {
  return model.state_reward(s2) + gamma * q.state_value(s2);
}

double expected_backup(const EmpiricalModel& model, const QTable& q, int s, int a,
                       double gamma) {
  const SparseRow& row = model.support(s, a);
  const double total = model.visit[s][a];
  double e = 0.0;
  for (const auto& [s2, w] : row) e += (w / total) * backup_value(model, q, s2, gamma);
  return e;
}

SparseRow value_deviation(const EmpiricalModel& model, const QTable& q, int s, int a,
                          double gamma, const TransformSpec& spec) {
  const SparseRow& row = model.support(s, a);
  const double total = model.visit[s][a];
  const bool literal = spec.literal_value_deviation;

  double expectation = 0.0;
  for (const auto& [s2, w] : row)
    expectation += (w / total) * next_state_value(model, q, s2, gamma, literal);
  if (std::abs(expectation) < spec.value_floor)
    throw DegenerateValueError(
        "value_deviation: expected backup at (" + std::to_string(s) + "," +
        std::to_string(a) + ") is " + detail::fmt_g17(expectation) +
        ", below the value floor; rescale rewards to a positive range");

  SparseRow lambdas;
  lambdas.reserve(row.size());
  for (const auto& [s2, w] : row) {
    const double u = next_state_value(model, q, s2, gamma, literal);
    const double raw = 1.0 + (u - expectation) / std::abs(expectation);
    lambdas.emplace_back(s2, clip_and_floor(raw, spec));
  }
  return lambdas;
}

SparseRow transition_normalization(const EmpiricalModel& model, int s, int a) {
  const SparseRow& row = model.support(s, a);
  const double total = model.visit[s][a];
  SparseRow lambdas;
  lambdas.reserve(row.size());
  for (const auto& [s2, w] : row) lambdas.emplace_back(s2, total / w);
  return lambdas;
}

WeightedSupport modified_transitions(const EmpiricalModel& model, const QTable& q,
                                     int s, int a, double gamma,
                                     const TransformSpec& spec) {
  const SparseRow& row = model.support(s, a);
  const double total = model.visit[s][a];

  WeightedSupport ws;
  ws.state = s;
  ws.action = a;
  ws.entries.reserve(row.size());

  SparseRow vd;
  if (uses_vd(spec.mode)) vd = value_deviation(model, q, s, a, gamma, spec);

  double mass_sum = 0.0;
  double mass_max = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    WeightedEntry e;
    e.next_state = row[k].first;
    e.p_offline = row[k].second / total;
    e.lambda_tn = uses_tn(spec.mode) ? 1.0 / e.p_offline : 1.0;
    e.lambda_vd = uses_vd(spec.mode) ? vd[k].second : 1.0;
    e.modified_prob = e.p_offline * e.lambda_tn * e.lambda_vd;  // unnormalized mass
    mass_sum += e.modified_prob;
    mass_max = std::max(mass_max, e.modified_prob);
    ws.entries.push_back(e);
  }
  if (mass_max < spec.value_floor)
    throw DegenerateValueError("modified_transitions: all masses at (" +
                               std::to_string(s) + "," + std::to_string(a) +
                               ") fell below the value floor");
  ws.normalizer = mass_sum;
  for (auto& e : ws.entries) e.modified_prob /= mass_sum;
  return ws;
}

double sample_weight(const EmpiricalModel& model, const QTable& q, int s, int a,
                     int s2, double gamma, const TransformSpec& spec) {
  double w = 1.0;
  if (uses_tn(spec.mode)) {
    const double p = model.transition_prob(s, a, s2);
    if (p <= 0.0)
      throw NoDataError("sample_weight: successor " + std::to_string(s2) +
                        " outside the support of (" + std::to_string(s) + "," +
                        std::to_string(a) + ")");
    w *= 1.0 / p;
  }
  if (uses_vd(spec.mode)) {
    const SparseRow& row = model.support(s, a);
    const double total = model.visit[s][a];
    const bool literal = spec.literal_value_deviation;
    double expectation = 0.0;
    for (const auto& [sn, wn] : row)
      expectation += (wn / total) * next_state_value(model, q, sn, gamma, literal);
    if (std::abs(expectation) < spec.value_floor)
      throw DegenerateValueError("sample_weight: degenerate expected backup at (" +
                                 std::to_string(s) + "," + std::to_string(a) + ")");
    const double u = next_state_value(model, q, s2, gamma, literal);
    w *= clip_and_floor(1.0 + (u - expectation) / std::abs(expectation), spec);
  }
  return w;
}

}  // namespace odmarl
