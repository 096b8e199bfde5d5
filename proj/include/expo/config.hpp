#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "expo/agent.hpp"

namespace expo {

// One training run, as read from a sectioned key-value config file. Network
// input/output dimensions are not part of the file; they come from the
// environment when the agent is built.
struct RunConfig {
  std::string env_name = "point_maze";
  AgentConfig agent;

  std::uint64_t seed = 1;
  std::string dataset;  // .tds path; empty means no offline data
  std::string out_dir = "run_out";
  long total_steps = 50000;
  long eval_every = 2500;
  int eval_episodes = 50;
  int warm_start = 0;  // rollout transitions collected before training
};

// Parses config text. Sections: [env], [agent], [run]. Unknown sections or
// keys, duplicate keys, and malformed values are errors (fail-closed); every
// field is range-checked. Omitted keys keep their defaults. When
// apply_env_override is set and EXPO_SEED is present in the environment, it
// replaces the seed.
RunConfig parse_run_config(const std::string& text, bool apply_env_override = true);

// parse_run_config over a file's contents; IoError when unreadable.
RunConfig load_run_config(const std::filesystem::path& path, bool apply_env_override = true);

// Canonical text form: fixed section/key order, shortest round-trip floats.
// parse_run_config(dump_run_config(c)) reproduces c exactly.
std::string dump_run_config(const RunConfig& cfg);

// FNV-1a over the canonical dump with the seed and out_dir lines removed, so
// runs differing only in those group together (seed-sweep plotting).
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace expo
