// SPDX-License-Identifier: Apache-2.0
//
// Group-relative policy optimization for the linear-softmax policy.
//
// Each task is rolled out K times. Trajectory i gets the group-normalized
// advantage A_i = (R_i - mean(R)) / (std(R) + eps), population std, shared
// by all of its agent tokens. The per-token surrogate is
//   l_t = -min(rho_t A, clip(rho_t, 1 - eps_clip, 1 + eps_clip) A),
//   rho_t = pi_theta(a_t | x_t) / pi_old(a_t | x_t),
// summed over mask-1 tokens and averaged over the trajectories of the batch.

#ifndef MOLACT_GRPO_HPP_
#define MOLACT_GRPO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "molact/error.hpp"
#include "molact/policy.hpp"
#include "molact/rollout.hpp"
#include "molact/tasks.hpp"

namespace molact {

inline constexpr double kDefaultClip = 0.2;
inline constexpr double kDefaultStdEps = 1e-8;

inline std::vector<double> group_advantages(const std::vector<double>& rewards, double eps = kDefaultStdEps) {
  if (rewards.empty()) return {};
  // Centered on the first reward so equal rewards give exact zeros and a
  // constant shift only perturbs the inputs, not the mean's rounding.
  double n = static_cast<double>(rewards.size());
  std::vector<double> d;
  d.reserve(rewards.size());
  for (double r : rewards) d.push_back(r - rewards.front());
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / n);
  for (double& x : d) x = (x - mean) / (sd + eps);
  return d;
}

inline std::vector<double> group_advantages(const RolloutGroup& g, double eps = kDefaultStdEps) {
  std::vector<double> r;
  for (const auto& t : g.trajectories) {
    if (!t.reward) throw Error("trajectory " + g.group_id + "/" + std::to_string(t.chain_id) + " has no reward");
    r.push_back(t.reward->total);
  }
  return group_advantages(r, eps);
}

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d theta, same layout as theta
  int tokens = 0;            // mask-1 tokens that contributed
  int clipped = 0;           // tokens whose gradient was cut by the clip
};

/// Clipped surrogate and its gradient at the policy's current theta. The
/// decisions recorded at sampling time supply pi_old and the features; each
/// mask-1 token consumes the next decision in order.
inline LossResult grpo_loss(const LinearSoftmaxPolicy& policy, const std::vector<RolloutGroup>& groups,
                            double eps_clip = kDefaultClip, double eps_std = kDefaultStdEps) {
  LossResult out;
  out.grad.assign(policy.theta().size(), 0.0);
  int trajectories = 0;
  for (const auto& g : groups) {
    auto adv = group_advantages(g, eps_std);
    for (std::size_t i = 0; i < g.trajectories.size(); ++i) {
      const Trajectory& t = g.trajectories[i];
      ++trajectories;
      if (t.tokens.size() != t.mask.size()) throw Error("mask length differs from token length");
      double a = adv[i];
      std::size_t d = 0;
      for (std::size_t k = 0; k < t.tokens.size(); ++k) {
        if (t.mask[k] == 0) continue;
        if (d >= t.decisions.size()) throw Error("trajectory has more agent tokens than recorded decisions");
        const Decision& dec = t.decisions[d++];
        if (dec.token != t.tokens[k]) throw Error("recorded decision does not match the token stream");
        double lp = policy.log_prob(dec);
        double rho = std::exp(lp - dec.logprob);
        double unclipped = rho * a;
        double clipped = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip) * a;
        out.loss -= std::min(unclipped, clipped);
        ++out.tokens;
        // The min selects the unclipped branch unless clipping lowers the
        // objective, in which case the gradient vanishes.
        bool active = unclipped <= clipped || (rho >= 1.0 - eps_clip && rho <= 1.0 + eps_clip);
        if (!active) {
          ++out.clipped;
          continue;
        }
        policy.accumulate_log_prob_gradient(dec, -a * rho, out.grad);
      }
      if (d != t.decisions.size()) throw Error("trajectory has fewer agent tokens than recorded decisions");
    }
  }
  if (trajectories > 0) {
    double inv = 1.0 / trajectories;
    out.loss *= inv;
    for (double& x : out.grad) x *= inv;
  }
  if (!std::isfinite(out.loss)) throw TrainingDiverged("non-finite GRPO loss");
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  std::uint64_t seed = 7;
  int k = 8;
  int groups_per_iteration = 3;
  double learning_rate = 0.05;
  int max_turns = 16;
  double eps_clip = kDefaultClip;
  double eps_std = kDefaultStdEps;
  int updates_per_batch = 1;  // gradient steps on each sampled batch
};

struct CurvePoint {
  int iteration = 0;
  double mean_reward = 0.0;
  double mean_r_task = 0.0;
  double gate_fail_rate = 0.0;
  std::string stage;
};

inline void write_curve_header(std::ostream& out) { out << "iteration,mean_reward,mean_r_task,gate_fail_rate,stage\n"; }

inline void write_curve_row(std::ostream& out, const CurvePoint& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,", p.iteration, p.mean_reward, p.mean_r_task, p.gate_fail_rate);
  out << buf << p.stage << '\n';
}

inline CurvePoint summarize(const std::vector<RolloutGroup>& groups, int iteration, std::string stage) {
  CurvePoint p;
  p.iteration = iteration;
  p.stage = std::move(stage);
  int n = 0;
  for (const auto& g : groups) {
    for (const auto& t : g.trajectories) {
      if (!t.reward) continue;
      ++n;
      p.mean_reward += t.reward->total;
      p.mean_r_task += t.reward->r_task;
      p.gate_fail_rate += t.reward->gate_failed ? 1.0 : 0.0;
    }
  }
  if (n > 0) {
    p.mean_reward /= n;
    p.mean_r_task /= n;
    p.gate_fail_rate /= n;
  }
  return p;
}

/// Stage RNG seed, so a resumed stage samples the same tasks as an
/// uninterrupted run.
inline std::uint64_t stage_seed(std::uint64_t seed, int stage) {
  return splitmix64(seed ^ splitmix64(0x7374616765ULL + static_cast<std::uint64_t>(stage)));
}

/// Runs `iterations` GRPO updates on `tasks`. Iteration numbers in the curve
/// start at `first_iteration`. `on_point` sees every curve point.
inline std::vector<CurvePoint> train_stage(LinearSoftmaxPolicy& policy, const std::vector<Task>& tasks,
                                           const TrainConfig& cfg, const Toolbox& tools, int stage_index,
                                           const std::string& stage_label, int iterations, int first_iteration = 0,
                                           const std::function<void(const CurvePoint&)>& on_point = {}) {
  if (tasks.empty()) throw ConfigError("stage '" + stage_label + "' has no tasks");
  if (cfg.k < 1 || cfg.groups_per_iteration < 1 || cfg.updates_per_batch < 1 || iterations < 0) throw ConfigError("invalid training sizes");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) throw ConfigError("invalid learning rate");
  std::mt19937_64 rng(stage_seed(cfg.seed, stage_index));
  std::vector<CurvePoint> curve;
  for (int it = 0; it < iterations; ++it) {
    std::vector<RolloutGroup> batch;
    for (int g = 0; g < cfg.groups_per_iteration; ++g) {
      const Task& task = tasks[static_cast<std::size_t>(rng() % tasks.size())];
      EpisodeConfig ec{cfg.max_turns, cfg.k, rng()};
      batch.push_back(run_group(policy, task, ec, tools,
                                stage_label + "-" + std::to_string(first_iteration + it) + "-" + std::to_string(g)));
    }
    CurvePoint p = summarize(batch, first_iteration + it, stage_label);
    for (int u = 0; u < cfg.updates_per_batch; ++u) {
      LossResult lr = grpo_loss(policy, batch, cfg.eps_clip, cfg.eps_std);
      auto& theta = policy.theta();
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * lr.grad[i];
      for (double x : theta) {
        if (!std::isfinite(x)) throw TrainingDiverged("non-finite policy parameters");
      }
    }
    curve.push_back(p);
    if (on_point) on_point(p);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline nlohmann::ordered_json checkpoint_to_json(const LinearSoftmaxPolicy& policy, const Vocabulary& v,
                                                 int iterations_done, int stages_done) {
  nlohmann::ordered_json j;
  j["format"] = "molact-policy";
  j["version"] = 1;
  j["groups"] = v.groups();
  j["oracles"] = v.oracles();
  j["vocab_size"] = policy.vocab_size();
  j["feature_dim"] = policy.feature_dim();
  j["iterations_done"] = iterations_done;
  j["stages_done"] = stages_done;
  j["theta"] = policy.theta();
  return j;
}

struct Checkpoint {
  LinearSoftmaxPolicy policy;
  int iterations_done = 0;
  int stages_done = 0;
};

/// Rejects checkpoints whose vocabulary differs from `v`.
inline Checkpoint checkpoint_from_json(const nlohmann::json& j, const Vocabulary& v) {
  try {
    if (j.at("format").get<std::string>() != "molact-policy" || j.at("version").get<int>() != 1) {
      throw ConfigError("not a molact policy checkpoint");
    }
    if (j.at("groups").get<std::vector<std::string>>() != v.groups() ||
        j.at("oracles").get<std::vector<std::string>>() != v.oracles()) {
      throw ConfigError("checkpoint vocabulary does not match the catalog and oracles in use");
    }
    LinearSoftmaxPolicy p(v);
    if (j.at("vocab_size").get<int>() != p.vocab_size() || j.at("feature_dim").get<int>() != p.feature_dim()) {
      throw ConfigError("checkpoint shape does not match");
    }
    auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != p.theta().size()) throw ConfigError("checkpoint parameter count does not match");
    p.theta() = std::move(theta);
    return {std::move(p), j.at("iterations_done").get<int>(), j.at("stages_done").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const LinearSoftmaxPolicy& policy, const Vocabulary& v,
                            int iterations_done, int stages_done) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(policy, v, iterations_done, stages_done).dump() << '\n';
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path, const Vocabulary& v) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(j, v);
}

}  // namespace molact

#endif  // MOLACT_GRPO_HPP_
