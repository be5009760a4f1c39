// SPDX-License-Identifier: Apache-2.0
//
// molact command line: props, rollout, train, eval.
// Exit codes: 0 success, 1 internal error, 2 input error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "molact/canonical.hpp"
#include "molact/fg_catalog.hpp"
#include "molact/grpo.hpp"
#include "molact/metrics.hpp"
#include "molact/oracle.hpp"
#include "molact/policy.hpp"
#include "molact/properties.hpp"
#include "molact/rollout.hpp"
#include "molact/tasks.hpp"
#include "molact/train_config.hpp"
#include "molact/trajectory_io.hpp"

namespace {

using namespace molact;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 1;

struct InputError : Error {
  using Error::Error;
};

struct VocabOptions {
  std::string catalog;
  std::vector<std::string> groups;
  bool stubs = false;
};

void add_vocab_options(CLI::App* cmd, VocabOptions& v) {
  cmd->add_option("--catalog", v.catalog, "functional-group catalog JSON (default: built-in)");
  cmd->add_option("--groups", v.groups, "restrict the catalog to these groups")->delimiter(',');
  cmd->add_flag("--stub-bioactivity", v.stubs, "register hash stand-ins for drd2, jnk3 and gsk3b");
}

Catalog make_catalog(const std::string& path, const std::vector<std::string>& groups) {
  Catalog c = path.empty() ? default_catalog() : load_catalog(path);
  return groups.empty() ? c : catalog_subset(c, groups);
}

/// Built-in properties, then whatever MOLACT_ORACLE_CMD serves.
OracleRegistry make_registry(bool stubs) {
  OracleRegistry r = builtin_registry();
  if (const char* cmd = std::getenv("MOLACT_ORACLE_CMD"); cmd && *cmd) add_external_oracles(r, cmd);
  if (stubs) add_stub_bioactivity(r);
  return r;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_props(const std::string& smiles, bool as_json) {
  Molecule m = parse_smiles(smiles);
  ValidityReport v = check_validity(m);
  if (!v.valid) throw InputError("invalid molecule: " + v.violations.front());
  Catalog cat = default_catalog();
  nlohmann::ordered_json j;
  j["smiles"] = smiles;
  j["valid"] = true;
  j["canonical"] = canonical_smiles(m);
  auto prop = [&](const char* name, double (*f)(const Molecule&)) {
    try {
      j[name] = f(m);
    } catch (const UnsupportedAtomClass& e) {
      j[name] = nullptr;
    }
  };
  prop("logp", logp);
  prop("solubility", solubility);
  prop("qed", qed);
  nlohmann::ordered_json counts;
  for (const auto& g : cat.groups()) counts[g.name()] = count_group(m, g);
  j["groups"] = counts;

  if (as_json) {
    std::cout << j.dump() << '\n';
    return 0;
  }
  auto fmt = [](const nlohmann::ordered_json& x) {
    if (x.is_null()) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x.get<double>());
    return std::string(buf);
  };
  std::cout << "smiles      " << smiles << "\nvalid       yes\ncanonical   " << j["canonical"].get<std::string>()
            << "\nlogp        " << fmt(j["logp"]) << "\nsolubility  " << fmt(j["solubility"]) << "\nqed         "
            << fmt(j["qed"]) << "\ngroups\n";
  for (const auto& [name, n] : counts.items()) {
    if (n.get<int>() > 0) std::cout << "  " << name << ' ' << n.get<int>() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct RolloutArgs {
  std::string tasks;
  std::string policy = "scripted";
  int k = 1;
  int max_turns = 16;
  std::uint64_t seed = 0;
  std::string out;
  VocabOptions vocab;
};

int cmd_rollout(const RolloutArgs& a) {
  std::optional<nlohmann::json> ckpt;
  if (a.policy != "scripted" && a.policy != "random") {
    std::ifstream in(a.policy);
    if (!in) throw InputError("policy must be scripted, random or a checkpoint file; cannot open '" + a.policy + "'");
    try {
      ckpt = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("malformed checkpoint '" + a.policy + "': " + e.what());
    }
  }
  // A checkpoint carries its group list; use it unless --groups overrides.
  std::vector<std::string> groups = a.vocab.groups;
  if (ckpt && groups.empty() && ckpt->contains("groups")) groups = (*ckpt)["groups"].get<std::vector<std::string>>();
  Catalog catalog = make_catalog(a.vocab.catalog, groups);
  OracleRegistry registry = make_registry(a.vocab.stubs);
  Vocabulary vocab(catalog, registry);
  Toolbox tools{catalog, registry, vocab};
  auto tasks = load_tasks(a.tasks, catalog);

  std::unique_ptr<Agent> agent;
  if (a.policy == "scripted") {
    agent = std::make_unique<ExpertPolicy>();
  } else if (a.policy == "random") {
    agent = std::make_unique<RandomPolicy>();
  } else {
    agent = std::make_unique<LinearSoftmaxPolicy>(checkpoint_from_json(*ckpt, vocab).policy);
  }

  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& jsonl = a.out.empty() ? std::cout : file;
  std::ostream& log = a.out.empty() ? std::cerr : std::cout;

  int trajectories = 0, truncated_n = 0, edit_n = 0, edit_valid = 0, edit_pass = 0, opt_n = 0;
  double reward_sum = 0.0, opt_task_sum = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EpisodeConfig ec{a.max_turns, a.k, splitmix64(a.seed ^ splitmix64(i + 1))};
    RolloutGroup g = run_group(*agent, tasks[i], ec, tools, tasks[i].id);
    write_trajectories(jsonl, {g});
    for (const auto& t : g.trajectories) {
      ++trajectories;
      truncated_n += truncated(t) ? 1 : 0;
      reward_sum += t.reward->total;
      if (tasks[i].spec.stage == Stage::Editing) {
        ++edit_n;
        edit_valid += t.reward->gate_failed ? 0 : 1;
        edit_pass += (!t.reward->gate_failed && t.reward->r_task == 1.0) ? 1 : 0;
      } else {
        ++opt_n;
        opt_task_sum += t.reward->r_task;
      }
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "tasks %zu, trajectories %d, mean reward %.4f, truncated %d\n", tasks.size(),
                trajectories, trajectories ? reward_sum / trajectories : 0.0, truncated_n);
  log << buf;
  if (edit_n > 0) {
    std::snprintf(buf, sizeof buf, "editing: %d trajectories, pass@1 %.2f%%, validity %.2f%%\n", edit_n,
                  percent(edit_pass, edit_n), percent(edit_valid, edit_n));
    log << buf;
  }
  if (opt_n > 0) {
    std::snprintf(buf, sizeof buf, "optimization: %d trajectories, mean r_task %.4f\n", opt_n, opt_task_sum / opt_n);
    log << buf;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string resume;
  int stage = 0;  // 0: next stage after the checkpoint, or 1
  std::string curve;
  std::string checkpoint;
  bool stubs = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig rc = load_run_config(a.config);
  if (!a.curve.empty()) rc.curve = a.curve;
  if (!a.checkpoint.empty()) rc.checkpoint = a.checkpoint;
  Catalog catalog = make_catalog(rc.catalog.value_or(""), rc.groups);
  OracleRegistry registry = make_registry(a.stubs);
  Vocabulary vocab(catalog, registry);
  Toolbox tools{catalog, registry, vocab};

  std::vector<std::vector<Task>> stage_tasks;
  for (const auto& s : rc.stages) stage_tasks.push_back(load_tasks(s.tasks, catalog));

  LinearSoftmaxPolicy policy(vocab);
  int iterations_done = 0;
  int first = a.stage > 0 ? a.stage : 1;
  if (!a.resume.empty()) {
    Checkpoint ck = load_checkpoint(a.resume, vocab);
    policy = std::move(ck.policy);
    iterations_done = ck.iterations_done;
    if (a.stage == 0) first = ck.stages_done + 1;
    if (first != ck.stages_done + 1) {
      throw InputError("checkpoint finished " + std::to_string(ck.stages_done) + " stage(s); cannot start stage " +
                       std::to_string(first));
    }
  } else if (first > 1) {
    throw InputError("stage " + std::to_string(first) + " needs --resume with the stage " +
                     std::to_string(first - 1) + " checkpoint");
  }
  if (first < 1 || first > static_cast<int>(rc.stages.size())) {
    throw InputError("no stage " + std::to_string(first) + " in '" + a.config + "'");
  }

  std::cout << "config " << run_config_to_json(rc).dump() << '\n' << std::flush;
  std::ofstream curve = open_out(rc.curve);
  write_curve_header(curve);
  for (int s = first; s <= static_cast<int>(rc.stages.size()); ++s) {
    const StageSpec& spec = rc.stages[static_cast<std::size_t>(s - 1)];
    double tail = 0.0;
    int tail_n = 0;
    auto on_point = [&](const CurvePoint& p) {
      write_curve_row(curve, p);
      if (p.iteration >= iterations_done + spec.iterations - 10) {
        tail += p.mean_reward;
        ++tail_n;
      }
    };
    train_stage(policy, stage_tasks[static_cast<std::size_t>(s - 1)], rc.train, tools, s, spec.name, spec.iterations,
                iterations_done, on_point);
    iterations_done += spec.iterations;
    std::string path = rc.checkpoint_path(s);
    save_checkpoint(path, policy, vocab, iterations_done, s);
    char buf[256];
    std::snprintf(buf, sizeof buf, "stage %d (%s): %d iterations, last-10 mean reward %.4f, checkpoint %s\n", s,
                  spec.name.c_str(), spec.iterations, tail_n ? tail / tail_n : 0.0, path.c_str());
    std::cout << buf << std::flush;
  }
  curve.flush();
  if (!curve) throw InputError("failed writing '" + rc.curve + "'");
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval(const std::string& tasks_path, const std::string& outputs_path, bool as_json, const VocabOptions& v) {
  Catalog catalog = make_catalog(v.catalog, v.groups);
  OracleRegistry registry = make_registry(v.stubs);
  auto tasks = load_tasks(tasks_path, catalog);
  std::ifstream in(outputs_path);
  if (!in) throw InputError("cannot open outputs file '" + outputs_path + "'");
  MetricsReport r = evaluate_outputs(tasks, in, catalog, registry);
  if (as_json) {
    std::cout << report_to_json(r).dump() << '\n';
  } else {
    print_report(std::cout, r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molact: agentic molecule editing and optimization toolkit"};
  app.require_subcommand(1);

  std::string smiles;
  bool props_json = false;
  auto* props = app.add_subcommand("props", "print validity, canonical form, properties and group counts");
  props->add_option("smiles", smiles, "molecule")->required();
  props->add_flag("--json", props_json, "machine-readable output");

  RolloutArgs ra;
  auto* rollout = app.add_subcommand("rollout", "run K episodes per task and write trajectory JSONL");
  rollout->add_option("--tasks", ra.tasks, "task JSONL")->required();
  rollout->add_option("--policy", ra.policy, "scripted | random | checkpoint file")->capture_default_str();
  rollout->add_option("--k", ra.k, "chains per task")->capture_default_str()->check(CLI::PositiveNumber);
  rollout->add_option("--max-turns", ra.max_turns, "turn budget")->capture_default_str()->check(CLI::PositiveNumber);
  rollout->add_option("--seed", ra.seed, "base seed")->capture_default_str();
  rollout->add_option("--out", ra.out, "trajectory JSONL (default: stdout)");
  add_vocab_options(rollout, ra.vocab);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "GRPO training over the stages of a run file");
  train->add_option("--config", ta.config, "run file (JSON)")->required();
  train->add_option("--resume", ta.resume, "checkpoint to continue from");
  train->add_option("--stage", ta.stage, "first stage to run (1-based)")->check(CLI::PositiveNumber);
  train->add_option("--curve", ta.curve, "override the curve CSV path");
  train->add_option("--checkpoint", ta.checkpoint, "override the checkpoint prefix");
  train->add_flag("--stub-bioactivity", ta.stubs, "register hash stand-ins for drd2, jnk3 and gsk3b");

  std::string eval_tasks, eval_outputs;
  bool eval_json = false;
  VocabOptions ev;
  auto* eval = app.add_subcommand("eval", "Pass@1, validity, mean gain and success rate of an output file");
  eval->add_option("--tasks", eval_tasks, "task JSONL")->required();
  eval->add_option("--outputs", eval_outputs, "output JSONL of {\"id\", \"smiles\"}")->required();
  eval->add_flag("--json", eval_json, "machine-readable output");
  add_vocab_options(eval, ev);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*props) return cmd_props(smiles, props_json);
    if (*rollout) return cmd_rollout(ra);
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(eval_tasks, eval_outputs, eval_json, ev);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const OracleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    // Parse, task, catalog, config and checkpoint problems are all caused by
    // the inputs.
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
