#include "odmarl/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "odmarl/analysis.hpp"
#include "odmarl/dataset.hpp"
#include "odmarl/error.hpp"
#include "odmarl/tables.hpp"
#include "odmarl/verify.hpp"
#include "format_util.hpp"

namespace odmarl {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string behavior_description(const RunConfig& config) {
  std::string desc = config.behavior_kind;
  for (const auto& row : config.behavior_probs) {
    desc += " [";
    for (std::size_t i = 0; i < row.size(); ++i)
      desc += (i ? " " : "") + detail::fmt_g17(row[i]);
    desc += "]";
  }
  return desc;
}

}  // namespace

int cmd_collect(const RunConfig& config, std::ostream& out) {
  const EnvSpec env = build_env(config);
  const JointPolicy behavior = build_behavior(config, env);
  ensure_dir(config.dataset_dir);

  const auto datasets = collect(env, behavior, config.episodes, mix_seed(config.seed, 1),
                                behavior_description(config));
  write_env(env, config.env_path());
  out << "wrote " << config.env_path() << "\n";
  for (int i = 0; i < env.n_agents; ++i) {
    write_jsonl(datasets[i], config.dataset_path(i));
    out << "wrote " << config.dataset_path(i) << " (" << datasets[i].records.size()
        << " records)\n";
  }
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const EnvSpec env = build_env(config);
  ensure_dir(config.out_dir);

  for (int i = 0; i < env.n_agents; ++i) {
    AgentDataset dataset = read_jsonl(config.dataset_path(i));
    EmpiricalModel model =
        build_model(dataset, env.n_states, env.actions_per_agent[i], config.reward_tol);
    if (config.rescale_min) {
      model = rescale_rewards(model, *config.rescale_min, *config.rescale_max);
      dataset = rescale_rewards(dataset, *config.rescale_min, *config.rescale_max);
    }

    LearnConfig learn = config.learn;
    learn.seed = mix_seed(config.seed, 2 + static_cast<std::uint64_t>(i));

    QTable q;
    std::ofstream log(config.train_log_path(i));
    if (!log) throw IoError("cannot open " + config.train_log_path(i) + " for writing");
    if (config.algo == "vi") {
      SweepLog sweeps;
      q = modified_value_iteration(model, learn, &sweeps);
      log << "sweep,residual\n";
      for (std::size_t k = 0; k < sweeps.residuals.size(); ++k)
        log << k + 1 << ',' << detail::fmt_g17(sweeps.residuals[k]) << "\n";
      out << "agent " << i << ": value iteration converged in " << sweeps.residuals.size()
          << " sweeps\n";
    } else {
      TdLog td;
      q = weighted_td_learning(dataset, model, learn, &td);
      log << "step,weighted_sq_error\n";
      for (const auto& [step, loss] : td.loss)
        log << step << ',' << detail::fmt_g17(loss) << "\n";
      out << "agent " << i << ": td learning ran " << learn.steps << " steps\n";
    }
    write_qtable_csv(q, config.qtable_path(i));
    out << "wrote " << config.qtable_path(i) << "\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  const EnvSpec env = build_env(config);
  ensure_dir(config.out_dir);

  std::vector<QTable> tables;
  std::vector<std::vector<int>> policies;
  for (int i = 0; i < env.n_agents; ++i) {
    tables.push_back(
        read_qtable_csv(config.qtable_path(i), env.n_states, env.actions_per_agent[i]));
    policies.push_back(greedy_policy(tables.back()));
  }

  EvalReport report =
      evaluate_joint(env, policies, config.eval_episodes, mix_seed(config.seed, 3));
  if (env.n_agents >= 2) {
    const auto states = sample_states(env.n_states, 100, mix_seed(config.seed, 4));
    report.metrics["value_consensus"] = value_consensus(tables, states);
  }
  report.metrics["extrapolation_error"] =
      extrapolation_error(env, policies, tables, config.eval_episodes,
                          mix_seed(config.seed, 5), config.learn.gamma);

  // one results file per run keeps reruns byte-identical
  std::ofstream results(config.results_path());
  if (!results) throw IoError("cannot open " + config.results_path() + " for writing");
  append_eval_csv(results, config.run_id, report);

  out << "mean_return " << detail::fmt_g17(report.mean_return) << "\n";
  out << "std_return " << detail::fmt_g17(report.std_return) << "\n";
  for (const auto& [name, value] : report.metrics)
    out << name << ' ' << detail::fmt_g17(value) << "\n";
  out << "wrote " << config.results_path() << "\n";
  return 0;
}

int cmd_reproduce_tables(std::ostream& out) {
  const auto tables = reproduce_matrix_tables();
  out << render_tables(tables);
  return tables_all_pass(tables) ? 0 : 2;
}

int cmd_verify(const std::string& suite, std::ostream& out) {
  const SuiteResult result = run_suite(suite);
  out << "suite " << result.name << ": " << (result.passed ? "PASS" : "FAIL") << " ("
      << result.cases_run << " cases, " << result.cases_failed << " failed, "
      << detail::fmt_fixed(result.seconds, 2) << " s)\n";
  for (const auto& note : result.notes) out << "  " << note << "\n";
  return result.passed ? 0 : 2;
}

int cmd_inspect(const RunConfig& config, int agent, int state, int action,
                std::ostream& out) {
  const EnvSpec env = build_env(config);
  if (agent < 0 || agent >= env.n_agents)
    throw ValidationError("inspect: agent out of range");
  if (state < 0 || state >= env.n_states)
    throw ValidationError("inspect: state out of range");
  if (action < 0 || action >= env.actions_per_agent[agent])
    throw ValidationError("inspect: action out of range");

  const JointPolicy behavior = build_behavior(config, env);
  const EmpiricalModel model = exact_model_from_env(env, behavior, agent);
  const QTable q = QTable::zeros(model);
  const double gamma = config.learn.gamma;
  const WeightedSupport ws =
      modified_transitions(model, q, state, action, gamma, config.learn.transform);

  out << "agent " << agent + 1 << ", state " << state << ", action a" << action + 1
      << ", mode " << to_string(config.learn.transform.mode) << "\n";
  out << "  next   reward    p_offline  lambda_tn  lambda_vd  p_modified\n";
  double ret_offline = 0.0;
  double ret_modified = 0.0;
  for (const auto& e : ws.entries) {
    const double u = backup_value(model, q, e.next_state, gamma);
    ret_offline += e.p_offline * u;
    ret_modified += e.modified_prob * u;
    out << "  " << std::setw(4) << e.next_state << "   " << detail::fmt_fixed(u, 4)
        << "   " << detail::fmt_fixed(e.p_offline, 4) << "     "
        << detail::fmt_fixed(e.lambda_tn, 4) << "     "
        << detail::fmt_fixed(e.lambda_vd, 4) << "     "
        << detail::fmt_fixed(e.modified_prob, 4) << "\n";
  }
  out << "  expected return (offline):  " << detail::fmt_fixed(ret_offline, 4) << "\n";
  out << "  expected return (modified): " << detail::fmt_fixed(ret_modified, 4) << "\n";
  return 0;
}

int run_command(const std::function<int()>& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace odmarl
