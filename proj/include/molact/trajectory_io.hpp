// SPDX-License-Identifier: Apache-2.0
//
// Trajectory JSONL, one object per trajectory with a fixed key order:
//   {"group_id", "chain_id", "prompt": {"task", "source"},
//    "steps": [{"action": {...}, "observation": {"ok", "text", "value"?}}],
//    "final", "tokens", "mask",
//    "reward": {"task", "struct", "tool", "gate_failed", "total"}}
// Actions are {"type": "edit", "op", "group" | "del"+"add", "site"},
// {"type": "evaluate", "tool", "arg"} or {"type": "terminate"}.

#ifndef MOLACT_TRAJECTORY_IO_HPP_
#define MOLACT_TRAJECTORY_IO_HPP_

#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "molact/error.hpp"
#include "molact/rollout.hpp"

namespace molact {

using ojson = nlohmann::ordered_json;

inline ojson action_to_json(const Action& a) {
  ojson j;
  if (const auto* e = std::get_if<EditAction>(&a)) {
    j["type"] = "edit";
    j["op"] = std::string(edit_kind_name(e->kind));
    if (e->kind == EditKind::Substitute) {
      j["del"] = e->group;
      j["add"] = e->add_group;
    } else {
      j["group"] = e->group;
    }
    j["site"] = e->site ? ojson(*e->site) : ojson(nullptr);
  } else if (const auto* c = std::get_if<EvaluateCall>(&a)) {
    j["type"] = "evaluate";
    j["tool"] = c->tool;
    j["arg"] = c->argument;
  } else {
    j["type"] = "terminate";
  }
  return j;
}

inline Action action_from_json(const nlohmann::json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "terminate") return Terminate{};
  if (type == "evaluate") return EvaluateCall{j.at("tool").get<std::string>(), j.value("arg", std::string())};
  if (type != "edit") throw Error("unknown action type '" + type + "'");
  EditAction e;
  auto kind = edit_kind_from_name(j.at("op").get<std::string>());
  if (!kind) throw Error("unknown edit op in trajectory");
  e.kind = *kind;
  if (e.kind == EditKind::Substitute) {
    e.group = j.at("del").get<std::string>();
    e.add_group = j.at("add").get<std::string>();
  } else {
    e.group = j.at("group").get<std::string>();
  }
  if (j.contains("site") && !j["site"].is_null()) e.site = j["site"].get<int>();
  return e;
}

inline ojson trajectory_to_json(const Trajectory& t) {
  ojson j;
  j["group_id"] = t.group_id;
  j["chain_id"] = t.chain_id;
  j["prompt"] = ojson{{"task", t.task}, {"source", t.source}};
  ojson steps = ojson::array();
  for (const Step& s : t.steps) {
    ojson obs;
    obs["ok"] = s.observation.ok;
    obs["text"] = s.observation.text;
    if (s.observation.value) obs["value"] = *s.observation.value;
    steps.push_back(ojson{{"action", action_to_json(s.action)}, {"observation", obs}});
  }
  j["steps"] = steps;
  j["final"] = t.final_smiles ? ojson(*t.final_smiles) : ojson(nullptr);
  j["tokens"] = t.tokens;
  j["mask"] = t.mask;
  if (t.reward) {
    const RewardBreakdown& r = *t.reward;
    j["reward"] = ojson{{"task", r.r_task},
                        {"struct", r.r_struct},
                        {"tool", r.r_tool},
                        {"gate_failed", r.gate_failed},
                        {"total", r.total}};
  } else {
    j["reward"] = nullptr;
  }
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    Trajectory t;
    t.group_id = j.at("group_id").get<std::string>();
    t.chain_id = j.at("chain_id").get<int>();
    t.task = j.at("prompt").at("task").get<std::string>();
    t.source = j.at("prompt").at("source").get<std::string>();
    for (const auto& s : j.at("steps")) {
      Observation o;
      const auto& oj = s.at("observation");
      o.ok = oj.at("ok").get<bool>();
      o.text = oj.at("text").get<std::string>();
      if (oj.contains("value")) o.value = oj["value"].get<double>();
      t.steps.push_back({action_from_json(s.at("action")), std::move(o)});
    }
    if (!j.at("final").is_null()) t.final_smiles = j["final"].get<std::string>();
    t.tokens = j.at("tokens").get<std::vector<int>>();
    t.mask = j.at("mask").get<std::vector<int>>();
    if (t.tokens.size() != t.mask.size()) throw Error("mask length differs from token length");
    const auto& rj = j.at("reward");
    if (!rj.is_null()) {
      RewardBreakdown r;
      r.r_task = rj.at("task").get<double>();
      r.r_struct = rj.at("struct").get<double>();
      r.r_tool = rj.at("tool").get<int>();
      r.gate_failed = rj.at("gate_failed").get<bool>();
      r.total = rj.at("total").get<double>();
      t.reward = r;
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed trajectory record: ") + e.what());
  }
}

/// One line per trajectory, groups in order.
inline void write_trajectories(std::ostream& out, const std::vector<RolloutGroup>& groups) {
  for (const auto& g : groups) {
    for (const auto& t : g.trajectories) out << trajectory_to_json(t).dump() << '\n';
  }
  if (!out) throw Error("failed to write trajectories");
}

/// Consecutive lines sharing a group_id form one group.
inline std::vector<RolloutGroup> read_trajectories(std::istream& in) {
  std::vector<RolloutGroup> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Trajectory t;
    try {
      t = trajectory_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed trajectory line: ") + e.what());
    }
    if (groups.empty() || groups.back().group_id != t.group_id) groups.push_back({t.group_id, {}});
    groups.back().trajectories.push_back(std::move(t));
  }
  return groups;
}

}  // namespace molact

#endif  // MOLACT_TRAJECTORY_IO_HPP_
