#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "odmarl/dataset.hpp"
#include "odmarl/empirical.hpp"
#include "odmarl/qtable.hpp"
#include "odmarl/transforms.hpp"

namespace odmarl {

struct LearnConfig {
  double gamma = 0.99;
  double tol = 1e-10;        // sup-norm convergence threshold (value iteration)
  int max_sweeps = 10000;
  double q_init = 0.0;

  // TD path
  double lr = 0.01;
  long long steps = 100000;
  double polish_fraction = 0.2;  // tail share of steps run at lr / 10
  int vd_refresh_period = 1;     // steps between deviation-weight snapshots; <= 1 uses the live table
  double divergence_factor = 10.0;
  std::uint64_t seed = 0;

  TransformSpec transform;
};

struct SweepLog {
  std::vector<double> residuals;
};

struct TdLog {
  // (step, mean weighted squared TD error over the preceding window)
  std::vector<std::pair<long long, double>> loss;
};

/// One synchronous application of the modified Bellman operator: the
/// modified distributions and the backup targets are both computed from the
/// incoming table, so the deviation weights refresh once per sweep.
QTable vi_sweep(const EmpiricalModel& model, const QTable& q, double gamma,
                const TransformSpec& spec);

/// Iterates vi_sweep from a constant table until the sup-norm change drops
/// below tol. Throws NonConvergenceError (carrying the final residual) when
/// max_sweeps is exhausted.
QTable modified_value_iteration(const EmpiricalModel& model, const LearnConfig& config,
                                SweepLog* log = nullptr);

/// Samples records uniformly and applies
///   Q(s,a) += lr * w * (r + gamma * V(s') - Q(s,a))
/// with w the product of the active modification weights for the sampled
/// successor. Deterministic given the seed. Throws DivergenceError when |Q|
/// exceeds divergence_factor times the value ceiling.
QTable weighted_td_learning(const AgentDataset& dataset, const EmpiricalModel& model,
                            const LearnConfig& config, TdLog* log = nullptr);

/// Per-state greedy action, ties toward the lowest index. States with no
/// in-support action map to action 0 (a warning is printed once per call).
std::vector<int> greedy_policy(const QTable& table);

/// Discount threshold below which the combined modification provably
/// contracts: r_min / (2 r_max - r_min) for rewards in [r_min, r_max],
/// r_min > 0.
double gamma_bound(double r_min, double r_max);

/// (1 - gamma^(T+1)) / (1 - gamma) for a finite horizon T, 1 / (1 - gamma)
/// otherwise; the value ceiling is eta * r_max.
double horizon_eta(double gamma, std::optional<int> horizon = std::nullopt);

/// Positive affine reward rescale mapping the observed range onto
/// [new_min, new_max]; constant sources map to new_min.
EmpiricalModel rescale_rewards(const EmpiricalModel& model, double new_min, double new_max);
AgentDataset rescale_rewards(const AgentDataset& dataset, double new_min, double new_max);

}  // namespace odmarl
