#include "odmarl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "odmarl/error.hpp"
#include "odmarl/rng.hpp"
#include "format_util.hpp"

namespace odmarl {

QTable vi_sweep(const EmpiricalModel& model, const QTable& q, double gamma,
                const TransformSpec& spec) {
  QTable next = q;
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      if (!model.visited(s, a)) continue;
      const WeightedSupport ws = modified_transitions(model, q, s, a, gamma, spec);
      double backup = 0.0;
      for (const auto& e : ws.entries)
        backup += e.modified_prob * backup_value(model, q, e.next_state, gamma);
      next.set(s, a, backup);
    }
  }
  return next;
}

QTable modified_value_iteration(const EmpiricalModel& model, const LearnConfig& config,
                                SweepLog* log) {
  if (config.gamma <= 0.0 || config.gamma >= 1.0)
    throw ValidationError("modified_value_iteration: gamma must lie in (0, 1)");
  if (config.tol <= 0.0) throw ValidationError("modified_value_iteration: tol must be positive");

  QTable q = QTable::constant(model, config.q_init);
  double residual = 0.0;
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    const QTable next = vi_sweep(model, q, config.gamma, config.transform);
    residual = 0.0;
    for (std::size_t i = 0; i < q.q.size(); ++i)
      residual = std::max(residual, std::abs(next.q[i] - q.q[i]));
    q = next;
    if (log) log->residuals.push_back(residual);
    if (residual < config.tol) return q;
  }
  throw NonConvergenceError(
      "value iteration did not converge in " + std::to_string(config.max_sweeps) +
          " sweeps; final residual " + detail::fmt_g17(residual),
      residual);
}

QTable weighted_td_learning(const AgentDataset& dataset, const EmpiricalModel& model,
                            const LearnConfig& config, TdLog* log) {
  if (config.lr <= 0.0 || config.lr > 1.0)
    throw ValidationError("weighted_td_learning: lr must lie in (0, 1]");
  if (config.steps < 0) throw ValidationError("weighted_td_learning: steps must be >= 0");
  if (config.steps > 0 && dataset.records.empty())
    throw ValidationError("weighted_td_learning: dataset is empty");

  QTable q = QTable::constant(model, config.q_init);
  if (config.steps == 0) return q;

  const auto [r_lo, r_hi] = model.reward_range();
  const double ceiling =
      config.divergence_factor * std::max(std::abs(r_lo), std::abs(r_hi)) /
      (1.0 - config.gamma);

  // Deviation weights may read a periodically refreshed snapshot instead of
  // the live table; period <= 1 keeps them fully non-stationary.
  const bool snapshot_vd = config.vd_refresh_period > 1;
  QTable vd_view = q;

  Rng rng(config.seed);
  const long long polish_start =
      config.steps -
      static_cast<long long>(std::floor(static_cast<double>(config.steps) *
                                        std::clamp(config.polish_fraction, 0.0, 1.0)));
  const int n = static_cast<int>(dataset.records.size());

  double window_loss = 0.0;
  long long window_n = 0;

  for (long long step = 0; step < config.steps; ++step) {
    if (snapshot_vd && step % config.vd_refresh_period == 0) vd_view = q;
    const TransitionRecord& rec = dataset.records[rng.uniform_int(n)];

    const double w = sample_weight(model, snapshot_vd ? vd_view : q, rec.state,
                                   rec.action, rec.next_state, config.gamma,
                                   config.transform);
    const double target = rec.reward + config.gamma * q.state_value(rec.next_state);
    const double lr = step >= polish_start ? config.lr / 10.0 : config.lr;
    const double old = q.value(rec.state, rec.action);
    const double updated = old + lr * w * (target - old);
    q.set(rec.state, rec.action, updated);

    if (std::abs(updated) > ceiling)
      throw DivergenceError("weighted_td_learning diverged at step " +
                            std::to_string(step) + ": |Q(" + std::to_string(rec.state) +
                            "," + std::to_string(rec.action) + ")| = " +
                            detail::fmt_g17(std::abs(updated)) + " exceeds ceiling " +
                            detail::fmt_g17(ceiling));

    if (log) {
      const double err = target - old;
      window_loss += w * err * err;
      ++window_n;
      if ((step + 1) % 1000 == 0) {
        log->loss.emplace_back(step + 1, window_loss / static_cast<double>(window_n));
        window_loss = 0.0;
        window_n = 0;
      }
    }
  }
  return q;
}

std::vector<int> greedy_policy(const QTable& table) {
  std::vector<int> policy(table.n_states, 0);
  int unsupported = 0;
  for (int s = 0; s < table.n_states; ++s) {
    const int a = table.greedy_action(s);
    if (a < 0) {
      policy[s] = 0;
      const bool terminal =
          s < static_cast<int>(table.terminal.size()) && table.terminal[s];
      if (!terminal) ++unsupported;
    } else {
      policy[s] = a;
    }
  }
  if (unsupported > 0)
    std::cerr << "greedy_policy: " << unsupported
              << " state(s) have no in-support action; defaulting to action 0\n";
  return policy;
}

double gamma_bound(double r_min, double r_max) {
  if (r_min <= 0.0) throw ValidationError("gamma_bound: r_min must be positive");
  if (r_max < r_min) throw ValidationError("gamma_bound: r_max must be >= r_min");
  return r_min / (2.0 * r_max - r_min);
}

double horizon_eta(double gamma, std::optional<int> horizon) {
  if (gamma <= 0.0 || gamma >= 1.0)
    throw ValidationError("horizon_eta: gamma must lie in (0, 1)");
  if (!horizon) return 1.0 / (1.0 - gamma);
  return (1.0 - std::pow(gamma, *horizon + 1)) / (1.0 - gamma);
}

namespace {

// Affine map sending [lo, hi] onto [new_min, new_max]; constant sources pin
// to new_min.
std::pair<double, double> affine_coefficients(double lo, double hi, double new_min,
                                              double new_max) {
  if (new_min <= 0.0 || new_max <= new_min)
    throw ValidationError("rescale_rewards: need 0 < new_min < new_max");
  if (hi - lo <= 0.0) return {0.0, new_min};
  const double a = (new_max - new_min) / (hi - lo);
  return {a, new_min - a * lo};
}

}  // namespace

EmpiricalModel rescale_rewards(const EmpiricalModel& model, double new_min, double new_max) {
  const auto [lo, hi] = model.reward_range();
  const auto [a, b] = affine_coefficients(lo, hi, new_min, new_max);
  EmpiricalModel out = model;
  for (int s = 0; s < out.n_states; ++s)
    if (out.reward_known[s]) out.reward_of_state[s] = a * out.reward_of_state[s] + b;
  return out;
}

AgentDataset rescale_rewards(const AgentDataset& dataset, double new_min, double new_max) {
  if (dataset.records.empty())
    throw ValidationError("rescale_rewards: dataset is empty");
  double lo = dataset.records.front().reward;
  double hi = lo;
  for (const auto& rec : dataset.records) {
    lo = std::min(lo, rec.reward);
    hi = std::max(hi, rec.reward);
  }
  const auto [a, b] = affine_coefficients(lo, hi, new_min, new_max);
  AgentDataset out = dataset;
  for (auto& rec : out.records) rec.reward = a * rec.reward + b;
  return out;
}

}  // namespace odmarl
