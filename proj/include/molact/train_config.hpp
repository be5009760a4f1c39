// SPDX-License-Identifier: Apache-2.0
//
// Training run files. A run is a JSON object:
//   {"seed", "k", "groups_per_iteration", "updates_per_batch", "learning_rate",
//    "max_turns", "eps_clip", "eps_std",          optimizer settings
//    "catalog"?, "groups"?,                        vocabulary
//    "stages": [{"name", "tasks", "iterations"}],  run in order
//    "curve", "checkpoint"}                        outputs
// Every key but "stages" has a default. Task and catalog paths are relative
// to the run file; the curve CSV and the per-stage checkpoints
// "<checkpoint>.stage<N>.json" are relative to the working directory.

#ifndef MOLACT_TRAIN_CONFIG_HPP_
#define MOLACT_TRAIN_CONFIG_HPP_

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "molact/error.hpp"
#include "molact/grpo.hpp"

namespace molact {

struct StageSpec {
  std::string name;
  std::string tasks;
  int iterations = 0;
};

struct RunConfig {
  TrainConfig train;
  std::optional<std::string> catalog;
  std::vector<std::string> groups;  // empty: the whole catalog
  std::vector<StageSpec> stages;
  std::string curve = "curve.csv";
  std::string checkpoint = "policy";

  std::string checkpoint_path(int stage) const { return checkpoint + ".stage" + std::to_string(stage) + ".json"; }
};

inline nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.train.seed;
  j["k"] = c.train.k;
  j["groups_per_iteration"] = c.train.groups_per_iteration;
  j["updates_per_batch"] = c.train.updates_per_batch;
  j["learning_rate"] = c.train.learning_rate;
  j["max_turns"] = c.train.max_turns;
  j["eps_clip"] = c.train.eps_clip;
  j["eps_std"] = c.train.eps_std;
  j["catalog"] = c.catalog ? nlohmann::ordered_json(*c.catalog) : nlohmann::ordered_json(nullptr);
  j["groups"] = c.groups;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : c.stages) stages.push_back({{"name", s.name}, {"tasks", s.tasks}, {"iterations", s.iterations}});
  j["stages"] = stages;
  j["curve"] = c.curve;
  j["checkpoint"] = c.checkpoint;
  return j;
}

/// Paths in `j` are resolved against `base_dir`. Unknown keys are errors.
inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"seed",     "k",       "groups_per_iteration", "updates_per_batch",
                                              "learning_rate", "max_turns", "eps_clip", "eps_std", "catalog",
                                              "groups",   "stages",  "curve",                "checkpoint"};
  if (!j.is_object()) throw ConfigError("run file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown run file key '" + key + "'");
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
  };
  RunConfig c;
  try {
    TrainConfig& t = c.train;
    t.seed = j.value("seed", t.seed);
    t.k = j.value("k", t.k);
    t.groups_per_iteration = j.value("groups_per_iteration", t.groups_per_iteration);
    t.updates_per_batch = j.value("updates_per_batch", t.updates_per_batch);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.max_turns = j.value("max_turns", t.max_turns);
    t.eps_clip = j.value("eps_clip", t.eps_clip);
    t.eps_std = j.value("eps_std", t.eps_std);
    if (j.contains("catalog") && !j["catalog"].is_null()) c.catalog = resolve(j["catalog"].get<std::string>());
    c.groups = j.value("groups", c.groups);
    c.curve = j.value("curve", c.curve);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    for (const auto& s : j.at("stages")) {
      StageSpec st;
      st.name = s.at("name").get<std::string>();
      st.tasks = resolve(s.at("tasks").get<std::string>());
      st.iterations = s.at("iterations").get<int>();
      c.stages.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run file: ") + e.what());
  }
  const TrainConfig& t = c.train;
  if (c.stages.empty()) throw ConfigError("run file has no stages");
  for (const auto& s : c.stages) {
    if (s.name.empty() || s.name.find(',') != std::string::npos) throw ConfigError("stage names must be non-empty and comma-free");
    if (s.iterations < 0) throw ConfigError("stage '" + s.name + "' has negative iterations");
  }
  if (t.k < 1 || t.groups_per_iteration < 1 || t.updates_per_batch < 1 || t.max_turns < 1) {
    throw ConfigError("k, groups_per_iteration, updates_per_batch and max_turns must be positive");
  }
  if (!(t.learning_rate >= 0.0) || !(t.eps_clip > 0.0) || !(t.eps_std > 0.0)) {
    throw ConfigError("learning_rate must be non-negative and eps_clip, eps_std positive");
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed run file '" + path + "': " + e.what());
  }
  return run_config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace molact

#endif  // MOLACT_TRAIN_CONFIG_HPP_
