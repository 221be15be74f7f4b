#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odmarl/env.hpp"

namespace odmarl {

// One logged step as seen by a single agent: the record carries only that
// agent's own action, never the joint action.
struct TransitionRecord {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool done = false;

  bool operator==(const TransitionRecord&) const = default;
};

struct DatasetMeta {
  int schema_version = 1;
  std::string env_name;
  std::string behavior;  // free-form description, not consumed by learners
  std::uint64_t seed = 0;
  int n_episodes = 0;
  int agent_id = 0;
  int n_states = 0;
  int n_actions = 0;

  bool operator==(const DatasetMeta&) const = default;
};

struct AgentDataset {
  DatasetMeta meta;
  std::vector<TransitionRecord> records;

  bool operator==(const AgentDataset&) const = default;
};

/// Rolls out n_episodes under the behavior policy and returns one dataset per
/// agent. All datasets describe the same episodes (same states, rewards,
/// next states, done flags), each filtered to the owner's action.
/// Deterministic given the seed.
std::vector<AgentDataset> collect(const EnvSpec& env, const JointPolicy& behavior,
                                  int n_episodes, std::uint64_t seed,
                                  const std::string& behavior_desc = "");

/// JSON-Lines persistence: a metadata header line followed by one record per
/// line ({"s":int,"a":int,"r":float,"s2":int,"done":bool}). Lossless
/// round-trip. Malformed lines are reported with their line number;
/// out-of-range ids and unknown schema versions are rejected.
void write_jsonl(const AgentDataset& dataset, const std::string& path);
AgentDataset read_jsonl(const std::string& path);

}  // namespace odmarl
