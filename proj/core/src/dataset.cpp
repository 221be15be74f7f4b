#include "odmarl/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "odmarl/error.hpp"

namespace odmarl {

std::vector<AgentDataset> collect(const EnvSpec& env, const JointPolicy& behavior,
                                  int n_episodes, std::uint64_t seed,
                                  const std::string& behavior_desc) {
  if (n_episodes <= 0) throw ValidationError("collect: n_episodes must be positive");
  behavior.validate(env);
  if (!env.horizon) {
    bool any_terminal = false;
    for (char t : env.terminal) any_terminal |= (t != 0);
    if (!any_terminal)
      throw ValidationError("collect: environment has neither terminals nor a horizon");
  }

  std::vector<AgentDataset> datasets(env.n_agents);
  for (int i = 0; i < env.n_agents; ++i) {
    auto& meta = datasets[i].meta;
    meta.env_name = env.name;
    meta.behavior = behavior_desc;
    meta.seed = seed;
    meta.n_episodes = n_episodes;
    meta.agent_id = i;
    meta.n_states = env.n_states;
    meta.n_actions = env.actions_per_agent[i];
  }

  Rng rng(seed);
  std::vector<int> joint(env.n_agents);
  for (int ep = 0; ep < n_episodes; ++ep) {
    int s = sample_initial_state(env, rng);
    bool done = false;
    int t = 0;
    while (!done) {
      for (int i = 0; i < env.n_agents; ++i)
        joint[i] = rng.categorical(std::span<const double>(behavior.probs[i][s]));
      const StepResult step = env_step(env, s, joint, rng, t);
      for (int i = 0; i < env.n_agents; ++i)
        datasets[i].records.push_back(
            {s, joint[i], step.reward, step.next_state, step.done});
      s = step.next_state;
      done = step.done;
      ++t;
    }
  }
  return datasets;
}

void write_jsonl(const AgentDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");

  nlohmann::ordered_json header;
  header["schema"] = dataset.meta.schema_version;
  header["env"] = dataset.meta.env_name;
  header["behavior"] = dataset.meta.behavior;
  header["seed"] = dataset.meta.seed;
  header["episodes"] = dataset.meta.n_episodes;
  header["agent"] = dataset.meta.agent_id;
  header["n_states"] = dataset.meta.n_states;
  header["n_actions"] = dataset.meta.n_actions;
  out << header.dump() << "\n";

  for (const auto& rec : dataset.records) {
    nlohmann::ordered_json line;
    line["s"] = rec.state;
    line["a"] = rec.action;
    line["r"] = rec.reward;
    line["s2"] = rec.next_state;
    line["done"] = rec.done;
    out << line.dump() << "\n";
  }
  if (!out) throw IoError("failed writing " + path);
}

AgentDataset read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw IoError(path + ": no header");

  AgentDataset dataset;
  try {
    const auto header = nlohmann::json::parse(line);
    dataset.meta.schema_version = header.at("schema").get<int>();
    if (dataset.meta.schema_version != 1)
      throw ValidationError(path + ": unsupported schema version " +
                            std::to_string(dataset.meta.schema_version));
    dataset.meta.env_name = header.at("env").get<std::string>();
    dataset.meta.behavior = header.at("behavior").get<std::string>();
    dataset.meta.seed = header.at("seed").get<std::uint64_t>();
    dataset.meta.n_episodes = header.at("episodes").get<int>();
    dataset.meta.agent_id = header.at("agent").get<int>();
    dataset.meta.n_states = header.at("n_states").get<int>();
    dataset.meta.n_actions = header.at("n_actions").get<int>();
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(path + ": line 1: bad header: " + e.what());
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TransitionRecord rec;
    try {
      const auto j = nlohmann::json::parse(line);
      rec.state = j.at("s").get<int>();
      rec.action = j.at("a").get<int>();
      rec.reward = j.at("r").get<double>();
      rec.next_state = j.at("s2").get<int>();
      rec.done = j.at("done").get<bool>();
    } catch (const std::exception& e) {
      throw IoError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.state < 0 || rec.state >= dataset.meta.n_states ||
        rec.next_state < 0 || rec.next_state >= dataset.meta.n_states)
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": state id outside declared range");
    if (rec.action < 0 || rec.action >= dataset.meta.n_actions)
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": action id outside declared range");
    dataset.records.push_back(rec);
  }
  return dataset;
}

}  // namespace odmarl
