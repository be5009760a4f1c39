// SPDX-License-Identifier: Apache-2.0
//
// Episode machine: prompt, then turns of (agent action, tool observation)
// until terminate or the turn budget, then scoring.
//
// Token stream. Each episode is recorded as a flat token list over a fixed
// structured vocabulary with a parallel mask:
//   prompt       BOS STAGE <instruction tokens> SEP           mask 0
//   edit         OP GROUP [GROUP] SITE                        mask 1
//   evaluate     OP_EVAL TOOL                                 mask 1
//   terminate    OP_TERMINATE                                 mask 1
//   observation  OBS_OK|OBS_FAIL [VALUE bucket]               mask 0
// Site tokens index the tool-validated site list from enumerate_sites:
// SITE_AUTO lets the engine pick, SITE_k is the k-th listed site, SITE_OTHER
// any later one.

#ifndef MOLACT_ROLLOUT_HPP_
#define MOLACT_ROLLOUT_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "molact/canonical.hpp"
#include "molact/descriptors.hpp"
#include "molact/edit.hpp"
#include "molact/oracle.hpp"
#include "molact/reward.hpp"
#include "molact/smiles.hpp"
#include "molact/tasks.hpp"
#include "molact/validity.hpp"

namespace molact {

// ---------------------------------------------------------------------------
// Actions and observations

/// tool is "validity", "similarity" (argument "src" or "ref") or "property"
/// (argument: oracle name).
struct EvaluateCall {
  std::string tool;
  std::string argument;

  friend bool operator==(const EvaluateCall&, const EvaluateCall&) = default;
};

struct Terminate {
  friend bool operator==(const Terminate&, const Terminate&) = default;
};

using Action = std::variant<EditAction, EvaluateCall, Terminate>;

struct Observation {
  bool ok = true;
  std::string text;
  std::optional<double> value;  // similarity or property value

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Step {
  Action action;
  Observation observation;

  friend bool operator==(const Step&, const Step&) = default;
};

// ---------------------------------------------------------------------------
// Vocabulary

inline constexpr int kSiteSlots = 4;
inline constexpr int kValueBuckets = 16;

class Vocabulary {
 public:
  enum Fixed : int {
    BOS,
    SEP,
    STAGE_EDIT,
    STAGE_OPT,
    OBS_OK,
    OBS_FAIL,
    VALUE_0,
    OP_ADD = VALUE_0 + kValueBuckets,
    OP_DELETE,
    OP_SUBSTITUTE,
    OP_EVAL,
    OP_TERMINATE,
    SITE_AUTO,
    SITE_0,
    SITE_OTHER = SITE_0 + kSiteSlots,
    TOOL_VALIDITY,
    TOOL_SIM_SRC,
    TOOL_SIM_REF,
    TOOL_UNKNOWN,
    kFixedCount,
  };

  Vocabulary(std::vector<std::string> groups, std::vector<std::string> oracles)
      : groups_(std::move(groups)), oracles_(std::move(oracles)) {}

  Vocabulary(const Catalog& catalog, const OracleRegistry& registry) : oracles_(registry.names()) {
    for (const auto& g : catalog.groups()) groups_.push_back(g.name());
  }

  int size() const noexcept { return group_base() + static_cast<int>(groups_.size()) + 1; }
  const std::vector<std::string>& groups() const noexcept { return groups_; }
  const std::vector<std::string>& oracles() const noexcept { return oracles_; }

  int property_token(std::string_view oracle) const {
    for (std::size_t i = 0; i < oracles_.size(); ++i) {
      if (oracles_[i] == oracle) return kFixedCount + static_cast<int>(i);
    }
    return TOOL_UNKNOWN;
  }
  int group_token(std::string_view group) const {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      if (groups_[i] == group) return group_base() + static_cast<int>(i);
    }
    return group_unknown();
  }
  int group_unknown() const noexcept { return group_base() + static_cast<int>(groups_.size()); }
  int first_group() const noexcept { return group_base(); }
  int first_property() const noexcept { return kFixedCount; }

  static int op_token(EditKind k) {
    switch (k) {
      case EditKind::Add: return OP_ADD;
      case EditKind::Delete: return OP_DELETE;
      case EditKind::Substitute: return OP_SUBSTITUTE;
    }
    return OP_ADD;
  }

  /// Bucket b covers [(b-8)/4, (b-7)/4); values outside [-2, 2) clamp to the
  /// end buckets.
  static int value_token(double v) {
    double b = std::floor(v * 4.0) + kValueBuckets / 2;
    if (!(b >= 0)) b = 0;
    if (b > kValueBuckets - 1) b = kValueBuckets - 1;
    return VALUE_0 + static_cast<int>(b);
  }

 private:
  int group_base() const noexcept { return kFixedCount + static_cast<int>(oracles_.size()); }

  std::vector<std::string> groups_;
  std::vector<std::string> oracles_;
};

// ---------------------------------------------------------------------------
// Tools and the transition function

struct Toolbox {
  const Catalog& catalog;
  const OracleRegistry& oracles;
  const Vocabulary& vocab;
};

struct StepResult {
  Molecule state;
  Observation observation;
  bool done = false;
  bool tool_success = false;
  bool edit_success = false;
};

namespace detail {

inline std::string format_value(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

inline std::string edit_label(const EditAction& e) {
  std::string s(edit_kind_name(e.kind));
  s += " " + e.group;
  if (e.kind == EditKind::Substitute) s += " -> " + e.add_group;
  return s;
}

inline StepResult run_edit(const Molecule& state, const EditAction& e, const Toolbox& tools) {
  StepResult r{state, {}, false, false, false};
  EditOutcome out;
  try {
    out = apply_edit(state, e, tools.catalog);
  } catch (const UnknownGroupError& err) {
    r.observation = {false, std::string("edit failed: ") + err.what(), std::nullopt};
    return r;
  }
  if (!out.ok()) {
    r.observation = {false, "edit failed: " + out.failure, std::nullopt};
    return r;
  }
  r.state = std::move(*out.molecule);
  r.edit_success = true;
  r.observation = {true, edit_label(e) + " at atom " + std::to_string(out.applied_site) + ": " +
                             canonical_smiles(r.state),
                   std::nullopt};
  return r;
}

inline StepResult run_evaluate(const Molecule& state, const EvaluateCall& call, const Molecule& source,
                               const TaskSpec& task, const Toolbox& tools) {
  StepResult r{state, {}, false, false, false};
  auto fail = [&](std::string text) {
    r.observation = {false, std::move(text), std::nullopt};
    return r;
  };
  if (call.tool == "validity") {
    ValidityReport v = check_validity(state);
    r.observation = {true, v.valid ? "valid" : "invalid: " + v.violations.front(), std::nullopt};
  } else if (call.tool == "similarity") {
    Molecule other;
    if (call.argument == "src") {
      other = source;
    } else if (call.argument == "ref") {
      try {
        other = reference_molecule(source, task);
      } catch (const ParseError& e) {
        return fail(std::string("similarity failed: ") + e.what());
      }
    } else {
      return fail("similarity needs argument src or ref");
    }
    double s = task.stage == Stage::Optimization && call.argument == "src" ? scaffold_similarity(state, other)
                                                                           : tanimoto(state, other);
    r.observation = {true, "similarity " + format_value(s), s};
  } else if (call.tool == "property") {
    if (!tools.oracles.contains(call.argument)) return fail("unknown property '" + call.argument + "'");
    try {
      double v = tools.oracles.at(call.argument).evaluate(state);
      r.observation = {true, call.argument + " " + format_value(v), v};
    } catch (const Error& e) {
      return fail("property " + call.argument + " failed: " + e.what());
    }
  } else {
    return fail("unknown tool '" + call.tool + "'");
  }
  r.tool_success = true;
  return r;
}

}  // namespace detail

/// s_{t+1} = f(s_t, a_t): edits install the edited molecule on success, tool
/// calls and terminate leave the state untouched. Never throws for tool or
/// edit failures; they become failed observations.
inline StepResult step(const Molecule& state, const Action& action, const Molecule& source, const TaskSpec& task,
                       const Toolbox& tools) {
  if (const auto* e = std::get_if<EditAction>(&action)) return detail::run_edit(state, *e, tools);
  if (const auto* c = std::get_if<EvaluateCall>(&action)) return detail::run_evaluate(state, *c, source, task, tools);
  return {state, {true, "done", std::nullopt}, true, false, false};
}

// ---------------------------------------------------------------------------
// Tokenization

inline std::vector<int> prompt_tokens(const TaskSpec& task, const Vocabulary& v) {
  std::vector<int> t{Vocabulary::BOS};
  if (task.stage == Stage::Editing) {
    t.push_back(Vocabulary::STAGE_EDIT);
    t.push_back(Vocabulary::op_token(task.op));
    t.push_back(v.group_token(task.group));
    if (task.op == EditKind::Substitute) t.push_back(v.group_token(task.add_group));
  } else {
    t.push_back(Vocabulary::STAGE_OPT);
    t.push_back(v.property_token(task.oracle));
  }
  t.push_back(Vocabulary::SEP);
  return t;
}

inline int tool_token(const EvaluateCall& c, const Vocabulary& v) {
  if (c.tool == "validity") return Vocabulary::TOOL_VALIDITY;
  if (c.tool == "similarity" && c.argument == "src") return Vocabulary::TOOL_SIM_SRC;
  if (c.tool == "similarity" && c.argument == "ref") return Vocabulary::TOOL_SIM_REF;
  if (c.tool == "property") return v.property_token(c.argument);
  return Vocabulary::TOOL_UNKNOWN;
}

/// Site slot token for an edit issued against `state`.
inline int site_token(const Molecule& state, const EditAction& e, const Toolbox& tools) {
  if (!e.site) return Vocabulary::SITE_AUTO;
  std::vector<int> sites;
  try {
    sites = enumerate_sites(state, e, tools.catalog);
  } catch (const UnknownGroupError&) {
    return Vocabulary::SITE_OTHER;
  }
  for (int k = 0; k < kSiteSlots && k < static_cast<int>(sites.size()); ++k) {
    if (sites[static_cast<std::size_t>(k)] == *e.site) return Vocabulary::SITE_0 + k;
  }
  return Vocabulary::SITE_OTHER;
}

inline std::vector<int> action_tokens(const Action& action, const Molecule& state, const Toolbox& tools) {
  const Vocabulary& v = tools.vocab;
  if (const auto* e = std::get_if<EditAction>(&action)) {
    std::vector<int> t{Vocabulary::op_token(e->kind), v.group_token(e->group)};
    if (e->kind == EditKind::Substitute) t.push_back(v.group_token(e->add_group));
    t.push_back(site_token(state, *e, tools));
    return t;
  }
  if (const auto* c = std::get_if<EvaluateCall>(&action)) return {Vocabulary::OP_EVAL, tool_token(*c, v)};
  return {Vocabulary::OP_TERMINATE};
}

inline std::vector<int> observation_tokens(const Observation& o) {
  std::vector<int> t{o.ok ? Vocabulary::OBS_OK : Vocabulary::OBS_FAIL};
  if (o.value) t.push_back(Vocabulary::value_token(*o.value));
  return t;
}

// ---------------------------------------------------------------------------
// Agents and episodes

/// One sampled agent token, kept for the policy-gradient update.
struct Decision {
  std::vector<double> features;
  std::vector<double> relations;  // per legal token, for token-relational scorers
  std::vector<int> legal;
  int token = 0;
  double logprob = 0.0;
};

/// What an agent sees before choosing its next action.
struct EpisodeView {
  const TaskSpec& task;
  const Molecule& source;
  const Molecule& state;
  int turn = 0;
  int max_turns = 0;
  const Observation* last = nullptr;
  int successful_edits = 0;
  int successful_tools = 0;
  const Toolbox& tools;
};

class Agent {
 public:
  virtual ~Agent() = default;
  /// Token-level agents append one Decision per emitted action token.
  virtual Action act(const EpisodeView& view, std::mt19937_64& rng, std::vector<Decision>& decisions) = 0;
};

struct Trajectory {
  std::string group_id;
  int chain_id = 0;
  std::string task;    // task_text of the spec
  std::string source;  // s_src as given
  std::vector<Step> steps;
  std::optional<std::string> final_smiles;
  std::vector<int> tokens;
  std::vector<int> mask;
  std::optional<RewardBreakdown> reward;
  std::vector<Decision> decisions;  // in-process only

  /// Compares the serialized fields.
  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.group_id == b.group_id && a.chain_id == b.chain_id && a.task == b.task && a.source == b.source &&
           a.steps == b.steps && a.final_smiles == b.final_smiles && a.tokens == b.tokens && a.mask == b.mask &&
           a.reward == b.reward;
  }
};

struct RolloutGroup {
  std::string group_id;
  std::vector<Trajectory> trajectories;

  friend bool operator==(const RolloutGroup&, const RolloutGroup&) = default;
};

struct EpisodeConfig {
  int max_turns = 16;
  int k = 8;
  std::uint64_t seed = 0;
};

/// Per-chain seed: SplitMix64 of seed XOR (golden-ratio constant times
/// chain + 1).
inline std::uint64_t chain_seed(std::uint64_t seed, int chain) {
  return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(chain + 1)));
}

/// True when the episode ran out of turns without terminating.
inline bool truncated(const Trajectory& t) {
  return t.steps.empty() || !std::holds_alternative<Terminate>(t.steps.back().action);
}

/// Scores `t` from its recorded final molecule and tool history.
inline RewardBreakdown total_reward(const Trajectory& t, const Toolbox& tools) {
  TaskSpec spec = parse_task_text(t.task);
  Molecule src = parse_smiles(t.source);
  std::optional<Molecule> pred;
  if (t.final_smiles) {
    try {
      pred = parse_smiles(*t.final_smiles);
    } catch (const ParseError&) {
      pred.reset();
    }
  }
  bool tool = false;
  for (const Step& s : t.steps) tool = tool || (std::holds_alternative<EvaluateCall>(s.action) && s.observation.ok);
  return score_episode(src, pred, tool, spec, tools.catalog, tools.oracles);
}

inline Trajectory run_episode(Agent& agent, const Task& task, const EpisodeConfig& config, const Toolbox& tools,
                              std::uint64_t seed) {
  if (config.max_turns < 1) throw ConfigError("max_turns must be at least 1");
  std::mt19937_64 rng(seed);
  Molecule source = parse_smiles(task.source);
  if (!is_valid(source)) throw ConfigError("task '" + task.id + "' has an invalid source");

  Trajectory t;
  t.task = task_text(task.spec);
  t.source = task.source;
  t.tokens = prompt_tokens(task.spec, tools.vocab);
  t.mask.assign(t.tokens.size(), 0);

  Molecule state = source;
  int edits = 0;
  int tool_calls = 0;
  for (int turn = 0; turn < config.max_turns; ++turn) {
    EpisodeView view{task.spec, source, state, turn, config.max_turns,
                     t.steps.empty() ? nullptr : &t.steps.back().observation, edits, tool_calls, tools};
    std::size_t before = t.decisions.size();
    Action action = agent.act(view, rng, t.decisions);
    std::vector<int> agent_tokens = action_tokens(action, state, tools);
    if (t.decisions.size() != before) {
      bool same = t.decisions.size() - before == agent_tokens.size();
      for (std::size_t i = 0; same && i < agent_tokens.size(); ++i) {
        same = t.decisions[before + i].token == agent_tokens[i];
      }
      if (!same) throw std::logic_error("agent decisions disagree with the action's tokens");
    }
    StepResult r = step(state, action, source, task.spec, tools);
    t.tokens.insert(t.tokens.end(), agent_tokens.begin(), agent_tokens.end());
    t.mask.insert(t.mask.end(), agent_tokens.size(), 1);
    auto obs_tokens = observation_tokens(r.observation);
    t.tokens.insert(t.tokens.end(), obs_tokens.begin(), obs_tokens.end());
    t.mask.insert(t.mask.end(), obs_tokens.size(), 0);
    edits += r.edit_success ? 1 : 0;
    tool_calls += r.tool_success ? 1 : 0;
    state = std::move(r.state);
    t.steps.push_back({std::move(action), std::move(r.observation)});
    if (r.done) break;
  }
  // Scored from the written answer, so re-scoring a serialized trajectory
  // reproduces the reward bit for bit.
  t.final_smiles = canonical_smiles(state);
  t.reward = score_episode(source, parse_smiles(*t.final_smiles), tool_calls > 0, task.spec, tools.catalog,
                           tools.oracles);
  return t;
}

/// K chains of the same task, chain i seeded with chain_seed(config.seed, i).
inline RolloutGroup run_group(Agent& agent, const Task& task, const EpisodeConfig& config, const Toolbox& tools,
                              std::string group_id) {
  if (config.k < 1) throw ConfigError("group size must be at least 1");
  RolloutGroup g;
  g.group_id = std::move(group_id);
  for (int c = 0; c < config.k; ++c) {
    Trajectory t = run_episode(agent, task, config, tools, chain_seed(config.seed, c));
    t.group_id = g.group_id;
    t.chain_id = c;
    g.trajectories.push_back(std::move(t));
  }
  return g;
}

/// Replays the recorded actions from the source. Returns the final state.
inline Molecule replay(const Trajectory& t, const Toolbox& tools) {
  TaskSpec spec = parse_task_text(t.task);
  Molecule source = parse_smiles(t.source);
  Molecule state = source;
  for (const Step& s : t.steps) state = step(state, s.action, source, spec, tools).state;
  return state;
}

}  // namespace molact

#endif  // MOLACT_ROLLOUT_HPP_
