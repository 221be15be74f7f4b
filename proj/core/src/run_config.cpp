#include "odmarl/run_config.hpp"

#include <fstream>
#include <sstream>

#include "odmarl/error.hpp"

namespace odmarl {

std::string RunConfig::dataset_path(int agent) const {
  return dataset_dir + "/agent" + std::to_string(agent) + ".jsonl";
}
std::string RunConfig::qtable_path(int agent) const {
  return out_dir + "/qtable_agent" + std::to_string(agent) + ".csv";
}
std::string RunConfig::train_log_path(int agent) const {
  return out_dir + "/train_log_agent" + std::to_string(agent) + ".csv";
}
std::string RunConfig::env_path() const { return dataset_dir + "/env.txt"; }
std::string RunConfig::results_path() const { return out_dir + "/results.csv"; }

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: " + key + ": expected a number, got '" + value + "'");
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: " + key + ": expected an integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ValidationError("config: " + key + ": expected true/false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string tok;
  while (ss >> tok) out.push_back(to_double(key, tok));
  if (out.empty()) throw ValidationError("config: " + key + ": expected a list of numbers");
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ValidationError(origin + ": line " + std::to_string(line_no) +
                              ": malformed section header");
      section = t.substr(1, t.size() - 2);
      if (section != "run" && section != "env" && section != "behavior" &&
          section != "dataset" && section != "transform" && section != "learn" &&
          section != "eval")
        throw ValidationError(origin + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(origin + ": line " + std::to_string(line_no) +
                            ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string full = "[" + section + "] " + key;

    if (section == "run") {
      if (key == "seed") {
        config.seed = static_cast<std::uint64_t>(to_int(full, value));
        config.seed_set = true;
      } else if (key == "out") {
        config.out_dir = value;
      } else if (key == "id") {
        config.run_id = value;
      } else {
        throw ValidationError(origin + ": unknown key " + full);
      }
    } else if (section == "env") {
      if (key == "name") config.env_name = value;
      else if (key == "pos_bins") config.pos_bins = static_cast<int>(to_int(full, value));
      else if (key == "act_bins") config.act_bins = static_cast<int>(to_int(full, value));
      else if (key == "horizon") {
        if (value == "none") {
          config.env_horizon.reset();
        } else {
          config.dg_horizon = static_cast<int>(to_int(full, value));
          config.env_horizon = config.dg_horizon;
        }
      } else if (key == "n_states") config.n_states = static_cast<int>(to_int(full, value));
      else if (key == "n_actions") config.n_actions = static_cast<int>(to_int(full, value));
      else if (key == "n_agents") config.n_agents = static_cast<int>(to_int(full, value));
      else if (key == "r_min") config.r_min = to_double(full, value);
      else if (key == "r_max") config.r_max = to_double(full, value);
      else throw ValidationError(origin + ": unknown key " + full);
    } else if (section == "behavior") {
      if (key == "kind") {
        config.behavior_kind = value;
      } else if (key.rfind("agent", 0) == 0) {
        const int idx = static_cast<int>(to_int(full, key.substr(5)));
        if (idx < 0 || idx > 63)
          throw ValidationError(origin + ": " + full + ": agent index out of range");
        if (static_cast<int>(config.behavior_probs.size()) <= idx)
          config.behavior_probs.resize(idx + 1);
        config.behavior_probs[idx] = to_list(full, value);
      } else {
        throw ValidationError(origin + ": unknown key " + full);
      }
    } else if (section == "dataset") {
      if (key == "episodes") config.episodes = static_cast<int>(to_int(full, value));
      else if (key == "dir") config.dataset_dir = value;
      else if (key == "reward_tol") config.reward_tol = to_double(full, value);
      else throw ValidationError(origin + ": unknown key " + full);
    } else if (section == "transform") {
      if (key == "mode") config.learn.transform.mode = parse_transform_mode(value);
      else if (key == "epsilon") config.learn.transform.epsilon = to_double(full, value);
      else if (key == "clip") config.learn.transform.clip_enabled = to_bool(full, value);
      else if (key == "value_floor") config.learn.transform.value_floor = to_double(full, value);
      else if (key == "literal_vd")
        config.learn.transform.literal_value_deviation = to_bool(full, value);
      else throw ValidationError(origin + ": unknown key " + full);
    } else if (section == "learn") {
      if (key == "algo") config.algo = value;
      else if (key == "gamma") config.learn.gamma = to_double(full, value);
      else if (key == "tol") config.learn.tol = to_double(full, value);
      else if (key == "max_sweeps") config.learn.max_sweeps = static_cast<int>(to_int(full, value));
      else if (key == "q_init") config.learn.q_init = to_double(full, value);
      else if (key == "lr") config.learn.lr = to_double(full, value);
      else if (key == "steps") config.learn.steps = to_int(full, value);
      else if (key == "polish_fraction") config.learn.polish_fraction = to_double(full, value);
      else if (key == "vd_refresh") config.learn.vd_refresh_period = static_cast<int>(to_int(full, value));
      else if (key == "divergence_factor") config.learn.divergence_factor = to_double(full, value);
      else if (key == "rescale_min") config.rescale_min = to_double(full, value);
      else if (key == "rescale_max") config.rescale_max = to_double(full, value);
      else throw ValidationError(origin + ": unknown key " + full);
    } else if (section == "eval") {
      if (key == "episodes") config.eval_episodes = static_cast<int>(to_int(full, value));
      else throw ValidationError(origin + ": unknown key " + full);
    } else {
      throw ValidationError(origin + ": key outside any section: " + key);
    }
  }

  if (!config.seed_set) throw ValidationError(origin + ": [run] seed is required");
  if (config.env_name.empty()) throw ValidationError(origin + ": [env] name is required");
  if (config.env_name != "matrix_game" && config.env_name != "differential_game" &&
      config.env_name != "random_mdp")
    throw ValidationError(origin + ": [env] name must be matrix_game, differential_game, or random_mdp");
  if (config.behavior_kind != "uniform" && config.behavior_kind != "explicit")
    throw ValidationError(origin + ": [behavior] kind must be uniform or explicit");
  if (config.episodes <= 0)
    throw ValidationError(origin + ": [dataset] episodes must be positive");
  if (config.eval_episodes <= 0)
    throw ValidationError(origin + ": [eval] episodes must be positive");
  if (config.algo != "vi" && config.algo != "td")
    throw ValidationError(origin + ": [learn] algo must be vi or td");
  if (config.learn.gamma <= 0.0 || config.learn.gamma >= 1.0)
    throw ValidationError(origin + ": [learn] gamma must lie in (0, 1)");
  if (config.rescale_min.has_value() != config.rescale_max.has_value())
    throw ValidationError(origin + ": [learn] rescale_min and rescale_max must be set together");

  if (config.dataset_dir.empty()) config.dataset_dir = config.out_dir;
  if (config.run_id.empty()) config.run_id = "run" + std::to_string(config.seed);
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

EnvSpec build_env(const RunConfig& config) {
  if (config.env_name == "matrix_game") return matrix_game();
  if (config.env_name == "differential_game")
    return discretized_dg(config.pos_bins, config.act_bins, config.dg_horizon);
  return random_mdp(config.n_states, config.n_actions, config.n_agents, config.r_min,
                    config.r_max, mix_seed(config.seed, 0xE17),
                    config.env_horizon);
}

JointPolicy build_behavior(const RunConfig& config, const EnvSpec& env) {
  if (config.behavior_kind == "uniform") return uniform_policy(env);
  if (static_cast<int>(config.behavior_probs.size()) != env.n_agents)
    throw ValidationError("config: [behavior] explicit kind needs agent0.." +
                          std::to_string(env.n_agents - 1) + " rows");
  return marginal_policy(env, config.behavior_probs);
}

}  // namespace odmarl
