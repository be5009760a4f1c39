// Agents. Token-level agents fill the action template one slot at a time
// (operator, group, second group, site, or tool), sampling each token from
// the slot's legal set. The learnable agent is a linear-softmax scorer:
//   z_v = theta_v . phi(x) + w . psi(x, v),   pi(v | x) = softmax over legal(x)
// phi is a one-hot featurization of the task, the episode progress, the
// current molecule and the slot being filled; psi holds a few token-relational
// indicators (token is the instructed group, group is present, ...) whose
// weights w are shared by all tokens.

#ifndef MOLACT_POLICY_HPP_
#define MOLACT_POLICY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "molact/edit.hpp"
#include "molact/error.hpp"
#include "molact/rollout.hpp"

namespace molact {

/// Uniform double in [0,1) from the top 53 bits; identical on every
/// standard library, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class Slot { Operator, Group, AddGroup, Site, Tool };

/// Offsets of each one-hot block in phi.
class FeatureLayout {
 public:
  explicit FeatureLayout(const Vocabulary& v)
      : groups_(static_cast<int>(v.groups().size())), oracles_(static_cast<int>(v.oracles().size())) {
    int at = 0;
    auto take = [&](int n) {
      int start = at;
      at += n;
      return start;
    };
    bias = take(1);
    slot = take(5);
    stage = take(2);
    instr_op = take(4);
    instr_group = take(groups_ + 1);
    instr_add = take(groups_ + 1);
    oracle = take(oracles_ + 1);
    turn = take(4);
    last_obs = take(3);
    edits = take(3);
    tools = take(2);
    chosen_op = take(4);
    stage_x_edits = take(6);
    op_x_edits = take(12);
    stage_x_tools = take(4);
    edits_x_tools = take(6);
    present = take(groups_);
    dim = at;
  }

  int groups() const noexcept { return groups_; }
  int oracles() const noexcept { return oracles_; }

  int bias, slot, stage, instr_op, instr_group, instr_add, oracle, turn, last_obs, edits, tools, chosen_op,
      stage_x_edits, op_x_edits, stage_x_tools, edits_x_tools, present, dim;

 private:
  int groups_;
  int oracles_;
};

/// Token-relational indicators psi(x, v).
enum Relation : int {
  kTargetGroup,     // group slot, v is the instructed (removed) group
  kTargetAdd,       // second group slot, v is the instructed added group
  kTargetOp,        // operator slot, v is the instructed operator
  kRemovePresent,   // group slot of delete/substitute, group v is on the molecule
  kAddPresent,      // group slot of add, group v is on the molecule
  kReplacePresent,  // second group slot, group v is on the molecule
  kRelationCount,
};

namespace detail {

inline int index_or_last(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return static_cast<int>(names.size());
}

inline std::vector<bool> groups_present(const EpisodeView& view) {
  const auto& names = view.tools.vocab.groups();
  std::vector<bool> out(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) out[i] = view.tools.catalog.count(view.state, names[i]) > 0;
  return out;
}

}  // namespace detail

/// `chosen_op` is the operator token already emitted for this action, or -1.
inline std::vector<double> features(const FeatureLayout& L, const EpisodeView& view, Slot slot, int chosen_op,
                                    const std::vector<bool>& present) {
  std::vector<double> phi(static_cast<std::size_t>(L.dim), 0.0);
  auto on = [&](int i) { phi[static_cast<std::size_t>(i)] = 1.0; };
  const Vocabulary& v = view.tools.vocab;
  const TaskSpec& task = view.task;
  bool editing = task.stage == Stage::Editing;

  on(L.bias);
  on(L.slot + static_cast<int>(slot));
  on(L.stage + (editing ? 0 : 1));
  int op = editing ? static_cast<int>(task.op) : 3;
  on(L.instr_op + op);
  if (editing) {
    on(L.instr_group + detail::index_or_last(v.groups(), task.group));
    if (task.op == EditKind::Substitute) on(L.instr_add + detail::index_or_last(v.groups(), task.add_group));
  } else {
    on(L.oracle + detail::index_or_last(v.oracles(), task.oracle));
  }
  on(L.turn + std::min(view.turn, 3));
  on(L.last_obs + (view.last == nullptr ? 0 : (view.last->ok ? 1 : 2)));
  int e = std::min(view.successful_edits, 2);
  int t = std::min(view.successful_tools, 1);
  on(L.edits + e);
  on(L.tools + t);
  if (chosen_op >= Vocabulary::OP_ADD && chosen_op <= Vocabulary::OP_EVAL) on(L.chosen_op + chosen_op - Vocabulary::OP_ADD);
  on(L.stage_x_edits + (editing ? 0 : 3) + e);
  on(L.op_x_edits + op * 3 + e);
  on(L.stage_x_tools + (editing ? 0 : 2) + t);
  on(L.edits_x_tools + e * 2 + t);
  // The observation text carries the current molecule, so group presence is
  // still a function of the prefix.
  for (int i = 0; i < L.groups(); ++i) {
    if (present[static_cast<std::size_t>(i)]) on(L.present + i);
  }
  return phi;
}

/// psi for every legal token, flattened row-major (legal.size() x kRelationCount).
inline std::vector<double> relations(const EpisodeView& view, Slot slot, int chosen_op, const std::vector<int>& legal,
                                     const std::vector<bool>& present) {
  const Vocabulary& v = view.tools.vocab;
  const TaskSpec& task = view.task;
  bool editing = task.stage == Stage::Editing;
  std::vector<double> psi(legal.size() * kRelationCount, 0.0);
  int target_group = editing ? v.group_token(task.group) : -1;
  int target_add = editing && task.op == EditKind::Substitute ? v.group_token(task.add_group) : -1;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    double* row = psi.data() + i * kRelationCount;
    int tok = legal[i];
    if (slot == Slot::Operator) {
      if (editing && tok == Vocabulary::op_token(task.op)) row[kTargetOp] = 1;
      continue;
    }
    if (slot != Slot::Group && slot != Slot::AddGroup) continue;
    bool here = present[static_cast<std::size_t>(tok - v.first_group())];
    if (slot == Slot::Group) {
      if (tok == target_group) row[kTargetGroup] = 1;
      if (here) row[chosen_op == Vocabulary::OP_ADD ? kAddPresent : kRemovePresent] = 1;
    } else {
      if (tok == target_add) row[kTargetAdd] = 1;
      if (here) row[kReplacePresent] = 1;
    }
  }
  return psi;
}

/// Fills action templates slot by slot through choose().
class TokenAgent : public Agent {
 public:
  Action act(const EpisodeView& view, std::mt19937_64& rng, std::vector<Decision>& decisions) override {
    const Vocabulary& v = view.tools.vocab;
    FeatureLayout layout(v);
    std::vector<bool> present = detail::groups_present(view);
    auto pick = [&](Slot slot, int chosen_op, std::vector<int> legal) {
      Decision d;
      d.features = features(layout, view, slot, chosen_op, present);
      d.relations = relations(view, slot, chosen_op, legal, present);
      d.legal = std::move(legal);
      choose(d, rng);
      decisions.push_back(d);
      return d.token;
    };

    std::vector<int> groups;
    for (std::size_t i = 0; i < v.groups().size(); ++i) groups.push_back(v.first_group() + static_cast<int>(i));

    int op = pick(Slot::Operator, -1,
                  {Vocabulary::OP_ADD, Vocabulary::OP_DELETE, Vocabulary::OP_SUBSTITUTE, Vocabulary::OP_EVAL,
                   Vocabulary::OP_TERMINATE});
    if (op == Vocabulary::OP_TERMINATE) return Terminate{};
    if (op == Vocabulary::OP_EVAL) {
      std::vector<int> tools{Vocabulary::TOOL_VALIDITY, Vocabulary::TOOL_SIM_SRC, Vocabulary::TOOL_SIM_REF};
      for (std::size_t i = 0; i < v.oracles().size(); ++i) tools.push_back(v.first_property() + static_cast<int>(i));
      int tool = pick(Slot::Tool, op, tools);
      if (tool == Vocabulary::TOOL_VALIDITY) return EvaluateCall{"validity", ""};
      if (tool == Vocabulary::TOOL_SIM_SRC) return EvaluateCall{"similarity", "src"};
      if (tool == Vocabulary::TOOL_SIM_REF) return EvaluateCall{"similarity", "ref"};
      return EvaluateCall{"property", v.oracles()[static_cast<std::size_t>(tool - v.first_property())]};
    }

    EditAction e;
    e.kind = op == Vocabulary::OP_ADD ? EditKind::Add : op == Vocabulary::OP_DELETE ? EditKind::Delete
                                                                                     : EditKind::Substitute;
    e.group = v.groups()[static_cast<std::size_t>(pick(Slot::Group, op, groups) - v.first_group())];
    if (e.kind == EditKind::Substitute) {
      e.add_group = v.groups()[static_cast<std::size_t>(pick(Slot::AddGroup, op, groups) - v.first_group())];
    }
    std::vector<int> sites = enumerate_sites(view.state, e, view.tools.catalog);
    std::vector<int> legal{Vocabulary::SITE_AUTO};
    for (int k = 0; k < kSiteSlots && k < static_cast<int>(sites.size()); ++k) legal.push_back(Vocabulary::SITE_0 + k);
    int site = pick(Slot::Site, op, legal);
    if (site != Vocabulary::SITE_AUTO) e.site = sites[static_cast<std::size_t>(site - Vocabulary::SITE_0)];
    return e;
  }

 protected:
  /// Sets d.token (one of d.legal) and d.logprob.
  virtual void choose(Decision& d, std::mt19937_64& rng) = 0;
};

class RandomPolicy : public TokenAgent {
 protected:
  void choose(Decision& d, std::mt19937_64& rng) override {
    auto n = d.legal.size();
    auto k = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
    d.logprob = -std::log(static_cast<double>(n));
    d.token = d.legal[k];
  }
};

class LinearSoftmaxPolicy : public TokenAgent {
 public:
  /// theta holds vocab_size rows of feature_dim weights, then the
  /// kRelationCount shared relation weights.
  LinearSoftmaxPolicy(int vocab_size, int feature_dim)
      : vocab_size_(vocab_size), dim_(feature_dim),
        theta_(static_cast<std::size_t>(vocab_size) * static_cast<std::size_t>(feature_dim) + kRelationCount, 0.0) {}

  explicit LinearSoftmaxPolicy(const Vocabulary& v) : LinearSoftmaxPolicy(v.size(), FeatureLayout(v).dim) {}

  int vocab_size() const noexcept { return vocab_size_; }
  int feature_dim() const noexcept { return dim_; }
  std::vector<double>& theta() noexcept { return theta_; }
  const std::vector<double>& theta() const noexcept { return theta_; }

  /// Logits of d.legal, in order.
  std::vector<double> logits(const Decision& d) const {
    if (static_cast<int>(d.features.size()) != dim_ || d.relations.size() != d.legal.size() * kRelationCount) {
      throw Error("decision features do not match the policy");
    }
    const double* w = theta_.data() + relation_offset();
    std::vector<double> z(d.legal.size());
    for (std::size_t i = 0; i < d.legal.size(); ++i) {
      const double* row = theta_.data() + static_cast<std::size_t>(d.legal[i]) * static_cast<std::size_t>(dim_);
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += row[k] * d.features[static_cast<std::size_t>(k)];
      for (int r = 0; r < kRelationCount; ++r) s += w[r] * d.relations[i * kRelationCount + static_cast<std::size_t>(r)];
      z[i] = s;
    }
    return z;
  }

  /// Probabilities over d.legal, in order.
  std::vector<double> probabilities(const Decision& d) const {
    auto z = logits(d);
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& x : z) {
      x = std::exp(x - mx);
      sum += x;
    }
    for (double& x : z) x /= sum;
    return z;
  }

  /// log pi(d.token) under the current parameters.
  double log_prob(const Decision& d) const {
    auto z = logits(d);
    double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double x : z) sum += std::exp(x - mx);
    return z[index_of(d)] - mx - std::log(sum);
  }

  /// grad += scale * d log pi(d.token) / d theta.
  void accumulate_log_prob_gradient(const Decision& d, double scale, std::vector<double>& grad) const {
    auto p = probabilities(d);
    std::size_t chosen = index_of(d);
    double* gw = grad.data() + relation_offset();
    for (std::size_t i = 0; i < d.legal.size(); ++i) {
      double c = scale * ((i == chosen ? 1.0 : 0.0) - p[i]);
      if (c == 0.0) continue;
      double* row = grad.data() + static_cast<std::size_t>(d.legal[i]) * static_cast<std::size_t>(dim_);
      for (int k = 0; k < dim_; ++k) row[k] += c * d.features[static_cast<std::size_t>(k)];
      for (int r = 0; r < kRelationCount; ++r) gw[r] += c * d.relations[i * kRelationCount + static_cast<std::size_t>(r)];
    }
  }

 protected:
  void choose(Decision& d, std::mt19937_64& rng) override {
    auto p = probabilities(d);
    double u = uniform01(rng);
    std::size_t k = 0;
    double acc = p[0];
    while (k + 1 < p.size() && u >= acc) acc += p[++k];
    d.token = d.legal[k];
    d.logprob = std::log(p[k]);
  }

 private:
  std::size_t relation_offset() const noexcept {
    return static_cast<std::size_t>(vocab_size_) * static_cast<std::size_t>(dim_);
  }

  static std::size_t index_of(const Decision& d) {
    auto it = std::find(d.legal.begin(), d.legal.end(), d.token);
    if (it == d.legal.end()) throw Error("token " + std::to_string(d.token) + " is not legal at this decision");
    return static_cast<std::size_t>(it - d.legal.begin());
  }

  int vocab_size_;
  int dim_;
  std::vector<double> theta_;
};

/// Plays a fixed action list, then terminates.
class ScriptedPolicy : public Agent {
 public:
  explicit ScriptedPolicy(std::vector<Action> actions) : actions_(std::move(actions)) {}
  Action act(const EpisodeView& view, std::mt19937_64&, std::vector<Decision>&) override {
    auto i = static_cast<std::size_t>(view.turn);
    return i < actions_.size() ? actions_[i] : Action{Terminate{}};
  }

 private:
  std::vector<Action> actions_;
};

/// Hand-written expert. Editing: the instructed edit at the engine's site,
/// a validity check, terminate. Optimization: the single catalog addition
/// with the largest oracle gain (if positive), a property check, terminate.
class ExpertPolicy : public Agent {
 public:
  Action act(const EpisodeView& view, std::mt19937_64&, std::vector<Decision>&) override {
    const TaskSpec& task = view.task;
    if (task.stage == Stage::Editing) {
      if (view.turn == 0) return EditAction{task.op, task.group, task.add_group, std::nullopt};
      if (view.turn == 1) return EvaluateCall{"validity", ""};
      return Terminate{};
    }
    if (view.turn == 0) {
      if (auto best = best_addition(view)) return *best;
      return EvaluateCall{"property", task.oracle};
    }
    if (view.turn == 1) return EvaluateCall{"property", task.oracle};
    return Terminate{};
  }

 private:
  static std::optional<Action> best_addition(const EpisodeView& view) {
    if (!view.tools.oracles.contains(view.task.oracle)) return std::nullopt;
    PropertyOracle& oracle = view.tools.oracles.at(view.task.oracle);
    double base;
    try {
      base = oracle.evaluate(view.state);
    } catch (const Error&) {
      return std::nullopt;
    }
    std::optional<Action> best;
    double best_gain = 0.0;
    for (const auto& g : view.tools.catalog.groups()) {
      EditAction e{EditKind::Add, g.name(), "", std::nullopt};
      EditOutcome out = apply_edit(view.state, e, view.tools.catalog);
      if (!out.ok()) continue;
      try {
        double gain = oracle.evaluate(*out.molecule) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best = e;
        }
      } catch (const Error&) {
      }
    }
    return best;
  }
};

}  // namespace molact

#endif  // MOLACT_POLICY_HPP_
