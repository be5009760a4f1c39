// SPDX-License-Identifier: Apache-2.0
//
// Episode reward:
//   r = -1                                             if s_pred is invalid or absent
//   r = clip[-1,1](0.8 r_task + 0.15 r_struct + 0.05 r_tool)   otherwise
// Editing:      r_task = count equation of the instructed operator (0/1),
//               r_struct = max(0, Sim_tan(s_pred, s_ref)).
// Optimization: r_task = clip[0,1]((p(s_pred) - p(s_src)) / delta),
//               r_struct = Sim_scaf(s_pred, s_src).
// r_tool = 1 iff the episode made at least one successful tool call.

#ifndef MOLACT_REWARD_HPP_
#define MOLACT_REWARD_HPP_

#include <algorithm>
#include <optional>
#include <string>

#include "molact/descriptors.hpp"
#include "molact/edit.hpp"
#include "molact/fg_catalog.hpp"
#include "molact/oracle.hpp"
#include "molact/smiles.hpp"
#include "molact/validity.hpp"

namespace molact {

inline constexpr double kTaskWeight = 0.8;
inline constexpr double kStructWeight = 0.15;
inline constexpr double kToolWeight = 0.05;

enum class Stage { Editing, Optimization };

inline std::string_view stage_name(Stage s) { return s == Stage::Editing ? "editing" : "optimization"; }

/// Editing: `op`, `group` (the removed group for substitute), `add_group`
/// (substitute only) and an optional reference SMILES. Optimization: `oracle`.
struct TaskSpec {
  Stage stage = Stage::Editing;
  EditKind op = EditKind::Add;
  std::string group;
  std::string add_group;
  std::optional<std::string> reference;
  std::string oracle;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct RewardBreakdown {
  double r_task = 0.0;
  double r_struct = 0.0;
  int r_tool = 0;
  bool gate_failed = false;
  double total = 0.0;
  std::string reason;  // why the gate failed; not serialized

  friend bool operator==(const RewardBreakdown& a, const RewardBreakdown& b) {
    return a.r_task == b.r_task && a.r_struct == b.r_struct && a.r_tool == b.r_tool &&
           a.gate_failed == b.gate_failed && a.total == b.total;
  }
};

inline double combine_reward(double r_task, double r_struct, int r_tool) {
  return std::clamp(kTaskWeight * r_task + kStructWeight * r_struct + kToolWeight * r_tool, -1.0, 1.0);
}

/// 1 iff the instructed count equation holds. Throws UnknownGroupError.
inline int edit_task_reward(const Molecule& src, const Molecule& pred, const TaskSpec& task, const Catalog& catalog) {
  return count_law_holds(src, pred, task.op, task.group, task.add_group, catalog) ? 1 : 0;
}

/// Oracle errors propagate.
inline double opt_task_reward(const Molecule& src, const Molecule& pred, PropertyOracle& oracle) {
  double gain = oracle.evaluate(pred) - oracle.evaluate(src);
  return std::clamp(gain / oracle.spec().delta, 0.0, 1.0);
}

/// s_ref when the task has one, else s_src.
inline Molecule reference_molecule(const Molecule& src, const TaskSpec& task) {
  return task.reference ? parse_smiles(*task.reference) : src;
}

/// Scores a finished episode. Never throws for a valid source: scoring
/// failures (oracle errors, unknown groups) fail the gate with a reason.
inline RewardBreakdown score_episode(const Molecule& src, const std::optional<Molecule>& pred, bool tool_success,
                                     const TaskSpec& task, const Catalog& catalog, const OracleRegistry& oracles) {
  RewardBreakdown r;
  auto fail = [&](std::string why) {
    r = RewardBreakdown{};
    r.gate_failed = true;
    r.total = -1.0;
    r.reason = std::move(why);
    return r;
  };
  if (!pred) return fail("no final molecule");
  ValidityReport v = check_validity(*pred);
  if (!v.valid) return fail("invalid final molecule: " + v.violations.front());
  try {
    if (task.stage == Stage::Editing) {
      r.r_task = edit_task_reward(src, *pred, task, catalog);
      r.r_struct = std::max(0.0, tanimoto(*pred, reference_molecule(src, task)));
    } else {
      r.r_task = opt_task_reward(src, *pred, oracles.at(task.oracle));
      r.r_struct = scaffold_similarity(*pred, src);
    }
  } catch (const Error& e) {
    return fail(std::string("scoring failed: ") + e.what());
  }
  r.r_tool = tool_success ? 1 : 0;
  r.total = combine_reward(r.r_task, r.r_struct, r.r_tool);
  return r;
}

}  // namespace molact

#endif  // MOLACT_REWARD_HPP_
