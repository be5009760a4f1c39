// SPDX-License-Identifier: Apache-2.0
//
// Task records and their two encodings: the JSONL task file
//   {"id", "stage", "source", "instruction": {"op", ...}, "reference"?}
// where the instruction is {"op": "add"|"delete", "group"},
// {"op": "substitute", "del", "add"} or {"op": "optimize", "oracle"}; and
// the compact prompt string carried in trajectories, e.g.
//   edit:add:hydroxyl;ref=CCO   edit:substitute:hydroxyl>amine   optimize:logp

#ifndef MOLACT_TASKS_HPP_
#define MOLACT_TASKS_HPP_

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "molact/error.hpp"
#include "molact/fg_catalog.hpp"
#include "molact/reward.hpp"
#include "molact/smiles.hpp"
#include "molact/validity.hpp"

namespace molact {

struct Task {
  std::string id;
  std::string source;
  TaskSpec spec;

  friend bool operator==(const Task&, const Task&) = default;
};

class TaskFormatError : public Error {
 public:
  using Error::Error;
};

inline std::string task_text(const TaskSpec& t) {
  std::string s;
  if (t.stage == Stage::Optimization) {
    s = "optimize:" + t.oracle;
  } else {
    s = "edit:" + std::string(edit_kind_name(t.op)) + ":" + t.group;
    if (t.op == EditKind::Substitute) s += ">" + t.add_group;
  }
  if (t.reference) s += ";ref=" + *t.reference;
  return s;
}

inline TaskSpec parse_task_text(const std::string& text) {
  TaskSpec t;
  std::string body = text;
  if (auto semi = text.find(";ref="); semi != std::string::npos) {
    t.reference = text.substr(semi + 5);
    body = text.substr(0, semi);
  }
  auto bad = [&]() -> TaskSpec { throw TaskFormatError("malformed task string '" + text + "'"); };
  if (body.rfind("optimize:", 0) == 0) {
    t.stage = Stage::Optimization;
    t.oracle = body.substr(9);
    if (t.oracle.empty()) return bad();
    return t;
  }
  if (body.rfind("edit:", 0) != 0) return bad();
  auto colon = body.find(':', 5);
  if (colon == std::string::npos) return bad();
  auto kind = edit_kind_from_name(body.substr(5, colon - 5));
  if (!kind) return bad();
  t.op = *kind;
  std::string groups = body.substr(colon + 1);
  if (t.op == EditKind::Substitute) {
    auto gt = groups.find('>');
    if (gt == std::string::npos) return bad();
    t.group = groups.substr(0, gt);
    t.add_group = groups.substr(gt + 1);
    if (t.add_group.empty()) return bad();
  } else {
    t.group = groups;
  }
  if (t.group.empty()) return bad();
  return t;
}

/// Structural checks plus catalog membership of every named group.
inline void validate_task(const Task& task, const Catalog& catalog) {
  Molecule m;
  try {
    m = parse_smiles(task.source);
  } catch (const ParseError& e) {
    throw TaskFormatError("task '" + task.id + "': " + e.what());
  }
  if (!is_valid(m)) throw TaskFormatError("task '" + task.id + "': source is not a valid molecule");
  const TaskSpec& t = task.spec;
  if (t.stage == Stage::Editing) {
    if (!catalog.contains(t.group)) throw TaskFormatError("task '" + task.id + "': unknown group '" + t.group + "'");
    if (t.op == EditKind::Substitute && !catalog.contains(t.add_group)) {
      throw TaskFormatError("task '" + task.id + "': unknown group '" + t.add_group + "'");
    }
  } else if (t.oracle.empty()) {
    throw TaskFormatError("task '" + task.id + "': optimization task without an oracle");
  }
}

inline nlohmann::ordered_json task_to_json(const Task& task) {
  nlohmann::ordered_json j;
  j["id"] = task.id;
  j["stage"] = std::string(stage_name(task.spec.stage));
  j["source"] = task.source;
  nlohmann::ordered_json ins;
  const TaskSpec& t = task.spec;
  if (t.stage == Stage::Optimization) {
    ins["op"] = "optimize";
    ins["oracle"] = t.oracle;
  } else if (t.op == EditKind::Substitute) {
    ins["op"] = "substitute";
    ins["del"] = t.group;
    ins["add"] = t.add_group;
  } else {
    ins["op"] = std::string(edit_kind_name(t.op));
    ins["group"] = t.group;
  }
  j["instruction"] = ins;
  if (t.reference) j["reference"] = *t.reference;
  return j;
}

inline Task task_from_json(const nlohmann::json& j) {
  try {
    Task task;
    task.id = j.at("id").get<std::string>();
    task.source = j.at("source").get<std::string>();
    std::string stage = j.at("stage").get<std::string>();
    const auto& ins = j.at("instruction");
    std::string op = ins.at("op").get<std::string>();
    TaskSpec& t = task.spec;
    if (stage == "optimization") {
      if (op != "optimize") throw TaskFormatError("optimization task '" + task.id + "' must use op \"optimize\"");
      t.stage = Stage::Optimization;
      t.oracle = ins.at("oracle").get<std::string>();
    } else if (stage == "editing") {
      auto kind = edit_kind_from_name(op);
      if (!kind) throw TaskFormatError("task '" + task.id + "': unknown op '" + op + "'");
      t.op = *kind;
      if (t.op == EditKind::Substitute) {
        t.group = ins.at("del").get<std::string>();
        t.add_group = ins.at("add").get<std::string>();
      } else {
        t.group = ins.at("group").get<std::string>();
      }
    } else {
      throw TaskFormatError("task '" + task.id + "': unknown stage '" + stage + "'");
    }
    if (j.contains("reference") && !j["reference"].is_null()) t.reference = j["reference"].get<std::string>();
    return task;
  } catch (const nlohmann::json::exception& e) {
    throw TaskFormatError(std::string("malformed task record: ") + e.what());
  }
}

/// Reads a task JSONL file; blank lines are skipped. Every task is validated
/// against `catalog`.
inline std::vector<Task> load_tasks(const std::string& path, const Catalog& catalog) {
  std::ifstream in(path);
  if (!in) throw TaskFormatError("cannot open task file '" + path + "'");
  std::vector<Task> tasks;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw TaskFormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    tasks.push_back(task_from_json(j));
    validate_task(tasks.back(), catalog);
  }
  return tasks;
}

}  // namespace molact

#endif  // MOLACT_TASKS_HPP_
