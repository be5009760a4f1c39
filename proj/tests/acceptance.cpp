// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Arguments select criteria by number.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molact/canonical.hpp"
#include "molact/grpo.hpp"
#include "molact/metrics.hpp"
#include "molact/train_config.hpp"
#include "support/cli.hpp"
#include "support/oracles.hpp"

namespace molact {
namespace {

namespace fs = std::filesystem;
using testing::data_path;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Molecule> corpus_molecules(int max_atoms) {
  std::vector<Molecule> out;
  for (const auto& s : testing::load_corpus()) {
    Molecule m = parse_smiles(s);
    if (m.atom_count() <= max_atoms) out.push_back(std::move(m));
  }
  return out;
}

/// Count equation of the instructed edit, decided by the brute-force counter.
bool brute_force_law(const Molecule& before, const Molecule& after, EditKind kind, const std::string& group,
                     const std::string& add_group, const Catalog& cat) {
  auto count = [&](const Molecule& m, const std::string& g) { return testing::brute_force_count(m, cat.at(g)); };
  switch (kind) {
    case EditKind::Add: return count(after, group) == count(before, group) + 1;
    case EditKind::Delete: return count(after, group) == count(before, group) - 1;
    case EditKind::Substitute:
      return count(after, group) == count(before, group) - 1 &&
             count(after, add_group) == count(before, add_group) + 1;
  }
  return false;
}

// ---------------------------------------------------------------------------
// 1. Validity gate

Outcome validity_gate() {
  Catalog cat = default_catalog();
  OracleRegistry reg = builtin_registry();
  Vocabulary vocab(cat, reg);
  Toolbox tools{cat, reg, vocab};
  auto mols = corpus_molecules(18);
  std::vector<std::string> smiles;
  for (const auto& m : mols) smiles.push_back(canonical_smiles(m));
  const char* props[] = {"logp", "solubility", "qed"};
  std::mt19937_64 rng(2024);
  RandomPolicy agent;

  const int n = 10000;
  int gated = 0, mismatches = 0, out_of_range = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    Task task;
    task.id = "f" + std::to_string(i);
    task.source = smiles[rng() % smiles.size()];
    if (rng() % 2 == 0) {
      task.spec.op = static_cast<EditKind>(rng() % 3);
      task.spec.group = cat.groups()[rng() % cat.size()].name();
      if (task.spec.op == EditKind::Substitute) task.spec.add_group = cat.groups()[rng() % cat.size()].name();
      if (rng() % 2 == 0) task.spec.reference = smiles[rng() % smiles.size()];
    } else {
      task.spec.stage = Stage::Optimization;
      task.spec.oracle = props[rng() % 3];
    }
    EpisodeConfig ec{1 + static_cast<int>(rng() % 5), 1, 0};
    Trajectory t = run_episode(agent, task, ec, tools, rng());

    // Corrupt the final answer: keep, break valence, disconnect, garble or drop.
    int mode = static_cast<int>(rng() % 5);
    switch (mode) {
      case 1: t.final_smiles = "C(C)(C)(C)(C)" + *t.final_smiles; break;
      case 2: t.final_smiles = *t.final_smiles + ".O"; break;
      case 3: t.final_smiles = *t.final_smiles + "1"; break;
      case 4: t.final_smiles.reset(); break;
      default: break;
    }
    bool invalid = mode != 0;
    RewardBreakdown r = total_reward(t, tools);
    if (r.total < -1.0 || r.total > 1.0) ++out_of_range;
    if ((r.total == -1.0) != invalid || r.gate_failed != invalid) {
      ++mismatches;
      continue;
    }
    if (invalid) {
      ++gated;
      continue;
    }
    // Independent recomputation of the combination.
    Molecule src = parse_smiles(t.source);
    Molecule pred = parse_smiles(*t.final_smiles);
    double task_r, struct_r;
    if (task.spec.stage == Stage::Editing) {
      task_r = brute_force_law(src, pred, task.spec.op, task.spec.group, task.spec.add_group, cat) ? 1.0 : 0.0;
      Molecule ref = task.spec.reference ? parse_smiles(*task.spec.reference) : src;
      struct_r = std::max(0.0, testing::set_tanimoto(pred, ref));
    } else {
      PropertyOracle& o = reg.at(task.spec.oracle);
      task_r = std::clamp((o.evaluate(pred) - o.evaluate(src)) / o.spec().delta, 0.0, 1.0);
      struct_r = scaffold_similarity(pred, src);
    }
    bool tool = false;
    for (const Step& s : t.steps) tool = tool || (std::holds_alternative<EvaluateCall>(s.action) && s.observation.ok);
    double want = std::clamp(0.8 * task_r + 0.15 * struct_r + 0.05 * (tool ? 1.0 : 0.0), -1.0, 1.0);
    double err = std::abs(r.total - want);
    worst = std::max(worst, err);
    if (err > 1e-12 || !(*t.reward == r)) ++mismatches;
  }
  return {mismatches == 0 && out_of_range == 0,
          fmt("%d trajectories, %d gated, %d mismatches, %d out of range, max |err| %.1e", n, gated, mismatches,
              out_of_range, worst)};
}

// ---------------------------------------------------------------------------
// 2. Edit count law

Outcome edit_count_law() {
  Catalog cat = default_catalog();
  auto mols = corpus_molecules(20);
  std::mt19937_64 rng(99);
  const auto& groups = cat.groups();
  int successes = 0, attempts = 0, violations = 0;
  std::set<std::pair<int, std::string>> covered;
  while (successes < 5000 && attempts < 200000) {
    ++attempts;
    const Molecule& m = mols[rng() % mols.size()];
    EditAction act;
    act.kind = static_cast<EditKind>(rng() % 3);
    act.group = groups[rng() % groups.size()].name();
    if (act.kind == EditKind::Substitute) {
      act.add_group = groups[rng() % groups.size()].name();
      if (act.add_group == act.group) continue;
    }
    auto sites = enumerate_sites(m, act, cat);
    if (!sites.empty() && rng() % 2 == 0) act.site = sites[rng() % sites.size()];
    auto out = apply_edit(m, act, cat);
    if (!out.ok()) continue;
    ++successes;
    covered.insert({static_cast<int>(act.kind), act.group});
    if (!is_valid(*out.molecule) || !brute_force_law(m, *out.molecule, act.kind, act.group, act.add_group, cat)) {
      ++violations;
    }
  }
  return {successes >= 5000 && violations == 0,
          fmt("%d successful edits of %d attempts, %d violations, %zu (op, group) pairs", successes, attempts,
              violations, covered.size())};
}

// ---------------------------------------------------------------------------
// 3. Scripted policy on the editing fixture

Outcome scripted_benchmark() {
  Catalog cat = default_catalog();
  OracleRegistry reg = builtin_registry();
  Vocabulary vocab(cat, reg);
  Toolbox tools{cat, reg, vocab};
  auto tasks = load_tasks(data_path("edit20.jsonl"), cat);
  ExpertPolicy agent;
  int passed = 0, valid = 0, reward_agree = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Trajectory t = run_episode(agent, tasks[i], EpisodeConfig{16, 1, 0}, tools, i);
    if (!t.final_smiles || truncated(t)) continue;
    Molecule pred = parse_smiles(*t.final_smiles);
    if (!is_valid(pred)) continue;
    ++valid;
    const TaskSpec& s = tasks[i].spec;
    bool ok = brute_force_law(parse_smiles(tasks[i].source), pred, s.op, s.group, s.add_group, cat);
    passed += ok ? 1 : 0;
    reward_agree += (t.reward->r_task == (ok ? 1.0 : 0.0)) ? 1 : 0;
  }
  int n = static_cast<int>(tasks.size());
  return {n == 20 && passed == n && valid == n && reward_agree == n,
          fmt("%d tasks, pass@1 %.1f%%, validity %.1f%%", n, percent(passed, n), percent(valid, n))};
}

// ---------------------------------------------------------------------------
// 4. GRPO math

struct ToyEnv {
  Catalog catalog = catalog_subset(default_catalog(), {"hydroxyl", "amine", "chloro"});
  OracleRegistry oracles = builtin_registry();
  Vocabulary vocab{catalog, oracles};
  Toolbox tools{catalog, oracles, vocab};
};

void randomize(LinearSoftmaxPolicy& p, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (double& x : p.theta()) x = n(rng);
}

std::vector<RolloutGroup> sample_batch(LinearSoftmaxPolicy& p, const ToyEnv& env, std::uint64_t seed) {
  std::vector<Task> tasks = load_tasks(data_path("toy/stage1.jsonl"), env.catalog);
  auto opt = load_tasks(data_path("toy/stage2.jsonl"), env.catalog);
  tasks.insert(tasks.end(), opt.begin(), opt.end());
  std::mt19937_64 rng(seed);
  std::vector<RolloutGroup> out;
  for (int g = 0; g < 4; ++g) {
    const Task& t = tasks[rng() % tasks.size()];
    out.push_back(run_group(p, t, EpisodeConfig{6, 6, rng()}, env.tools, "g" + std::to_string(g)));
  }
  return out;
}

Outcome grpo_math() {
  std::vector<std::string> notes;
  bool ok = true;

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_mean = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> r(2 + trial % 15);
    for (double& x : r) x = u(rng);
    double mean = 0.0;
    for (double a : group_advantages(r)) mean += a;
    worst_mean = std::max(worst_mean, std::abs(mean / static_cast<double>(r.size())));
  }
  ok = ok && worst_mean < 1e-9;
  notes.push_back(fmt("max |mean A| %.1e", worst_mean));

  ToyEnv env;
  double worst_rel = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    LinearSoftmaxPolicy p(env.vocab);
    randomize(p, seed, 0.3);
    auto batch = sample_batch(p, env, seed);
    std::normal_distribution<double> nd(0.0, 0.05);
    for (double& x : p.theta()) x += nd(rng);
    LossResult lr = grpo_loss(p, batch);
    const double h = 1e-5;
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < p.theta().size(); ++i) {
      double keep = p.theta()[i];
      p.theta()[i] = keep + h;
      double up = grpo_loss(p, batch).loss;
      p.theta()[i] = keep - h;
      double down = grpo_loss(p, batch).loss;
      p.theta()[i] = keep;
      double fd = (up - down) / (2 * h);
      diff += (fd - lr.grad[i]) * (fd - lr.grad[i]);
      norm += lr.grad[i] * lr.grad[i];
    }
    double rel = norm > 0.0 ? std::sqrt(diff / norm) : 1.0;
    worst_rel = std::max(worst_rel, rel);
  }
  ok = ok && worst_rel < 1e-4;
  notes.push_back(fmt("gradient rel err %.1e", worst_rel));

  LinearSoftmaxPolicy p(env.vocab);
  randomize(p, 9, 0.4);
  auto batch = sample_batch(p, env, 30);
  randomize(p, 10, 0.4);
  LossResult base = grpo_loss(p, batch);
  auto mutated = batch;
  for (auto& g : mutated) {
    for (auto& t : g.trajectories) {
      for (std::size_t i = 0; i < t.tokens.size(); ++i) {
        if (t.mask[i] == 0) t.tokens[i] = static_cast<int>(rng() % 1000);
      }
    }
  }
  LossResult masked = grpo_loss(p, mutated);
  bool mask_ok = masked.loss == base.loss && masked.grad == base.grad;
  ok = ok && mask_ok;
  notes.push_back(mask_ok ? "mask-0 exact" : "mask-0 CHANGED");

  auto shifted = batch;
  for (auto& g : shifted) {
    double c = u(rng) * 3.0;
    for (auto& t : g.trajectories) t.reward->total += c;
  }
  LossResult sh = grpo_loss(p, shifted);
  double shift_err = std::abs(sh.loss - base.loss);
  for (std::size_t i = 0; i < sh.grad.size(); ++i) shift_err = std::max(shift_err, std::abs(sh.grad[i] - base.grad[i]));
  ok = ok && shift_err < 1e-9;
  notes.push_back(fmt("reward shift max diff %.1e", shift_err));

  std::string d;
  for (const auto& n : notes) d += (d.empty() ? "" : ", ") + n;
  return {ok, d};
}

// ---------------------------------------------------------------------------
// 5. Toy two-stage curriculum

Outcome toy_curriculum() {
  RunConfig two = load_run_config(data_path("toy/two_stage.json"));
  RunConfig one = load_run_config(data_path("toy/one_stage.json"));
  Catalog cat = catalog_subset(default_catalog(), two.groups);
  OracleRegistry reg = builtin_registry();
  Vocabulary vocab(cat, reg);
  Toolbox tools{cat, reg, vocab};
  auto s1 = load_tasks(two.stages[0].tasks, cat);
  auto s2 = load_tasks(two.stages[1].tasks, cat);
  int budget = two.stages[0].iterations + two.stages[1].iterations;
  if (one.stages.size() != 1 || one.stages[0].iterations != budget || one.stages[0].tasks != two.stages[1].tasks) {
    return {false, "one-stage run file does not match the two-stage budget"};
  }

  // Fixed evaluation: every task, 16 chains, seeds independent of training.
  auto evaluate = [&](LinearSoftmaxPolicy& p, const std::vector<Task>& tasks) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (int c = 0; c < 16; ++c) {
        sum += run_episode(p, tasks[i], EpisodeConfig{two.train.max_turns, 1, 0}, tools, 1000 + i * 16 + c)
                   .reward->total;
        ++n;
      }
    }
    return sum / n;
  };

  int wins = 0;
  bool stage1_ok = true;
  std::string d;
  for (std::uint64_t seed = 7; seed <= 11; ++seed) {
    TrainConfig cfg = two.train;
    cfg.seed = seed;
    LinearSoftmaxPolicy p(vocab);
    double start = evaluate(p, s1);
    auto curve = train_stage(p, s1, cfg, tools, 1, two.stages[0].name, two.stages[0].iterations);
    int reached = -1;
    for (std::size_t i = 9; i < curve.size() && i < 500; ++i) {
      double m = 0.0;
      for (std::size_t j = i - 9; j <= i; ++j) m += curve[j].mean_reward;
      if (m / 10.0 > 0.8) {
        reached = static_cast<int>(i);
        break;
      }
    }
    train_stage(p, s2, cfg, tools, 2, two.stages[1].name, two.stages[1].iterations, two.stages[0].iterations);
    double two_final = evaluate(p, s2);

    TrainConfig cfg1 = one.train;
    cfg1.seed = seed;
    LinearSoftmaxPolicy q(vocab);
    train_stage(q, s2, cfg1, tools, 1, one.stages[0].name, one.stages[0].iterations);
    double one_final = evaluate(q, s2);

    bool s1_ok = start < 0.2 && reached >= 0;
    stage1_ok = stage1_ok && s1_ok;
    wins += two_final > one_final ? 1 : 0;
    d += fmt("\n      seed %2d: start %.3f, >0.8 at iter %d, two-stage %.3f vs one-stage %.3f", static_cast<int>(seed),
             start, reached, two_final, one_final);
  }
  return {stage1_ok && wins >= 4, fmt("stage 1 %s, two-stage wins %d/5", stage1_ok ? "ok" : "FAILED", wins) + d};
}

// ---------------------------------------------------------------------------
// 6. Descriptors

Outcome descriptor_oracles() {
  auto corpus = testing::load_corpus();
  std::vector<Molecule> mols;
  for (const auto& s : corpus) mols.push_back(parse_smiles(s));
  int pairs = 0, tan_bad = 0;
  for (const auto& a : mols) {
    for (const auto& b : mols) {
      ++pairs;
      if (tanimoto(a, b) != testing::set_tanimoto(a, b)) ++tan_bad;
    }
  }
  int idem_bad = 0;
  for (const auto& m : mols) {
    Scaffold sc = murcko_scaffold(m);
    if (sc.empty()) continue;
    Scaffold again = murcko_scaffold(*sc.molecule);
    if (again.empty() || canonical_smiles(*again.molecule) != canonical_smiles(*sc.molecule)) ++idem_bad;
  }
  int hand_bad = 0;
  auto hand = testing::hand_scaffolds();
  for (const auto& [in, want] : hand) {
    Scaffold sc = murcko_scaffold(parse_smiles(in));
    if (sc.empty() || canonical_smiles(*sc.molecule) != canonical_smiles(parse_smiles(want))) ++hand_bad;
  }
  return {tan_bad == 0 && idem_bad == 0 && hand_bad == 0 && hand.size() == 15,
          fmt("%d Tanimoto pairs (%d differ), scaffold idempotence failures %d, hand scaffolds %zu/%zu", pairs,
              tan_bad, idem_bad, hand.size() - hand_bad, hand.size())};
}

// ---------------------------------------------------------------------------
// 7. Canonical round trip

Outcome canonical_round_trip() {
  auto corpus = testing::load_corpus();
  std::vector<Molecule> mols;
  std::vector<std::string> canon;
  int iso_bad = 0;
  for (const auto& s : corpus) {
    mols.push_back(parse_smiles(s));
    canon.push_back(canonical_smiles(mols.back()));
    if (!testing::isomorphic(mols.back(), parse_smiles(canon.back()))) ++iso_bad;
  }
  std::mt19937_64 rng(31);
  int perm_bad = 0;
  const int perms = 1000;
  for (int k = 0; k < perms; ++k) {
    std::size_t i = rng() % mols.size();
    Molecule p = permute_atoms(mols[i], testing::random_permutation(mols[i].atom_count(), rng));
    std::string c = canonical_smiles(p);
    if (c != canon[i] || !testing::isomorphic(parse_smiles(c), mols[i])) ++perm_bad;
  }
  return {iso_bad == 0 && perm_bad == 0, fmt("%zu corpus molecules (%d not isomorphic), %d permutations (%d differ)",
                                             mols.size(), iso_bad, perms, perm_bad)};
}

// ---------------------------------------------------------------------------
// 8. Metrics fixture through the CLI

Outcome metrics_fixture() {
  auto r = testing::run_cli("eval --json --tasks " + data_path("eval/tasks.jsonl") + " --outputs " +
                            data_path("eval/outputs.jsonl"));
  if (r.code != 0) return {false, fmt("eval exited %d", r.code)};
  auto j = nlohmann::json::parse(r.out);
  // Hand-computed from the atom table: C = 0.1441 + 4(0.1230), CC = 2(0.1441 + 3(0.1230)),
  // CO = (-0.2035 + 3(0.1230)) + (-0.2893 - 0.2677).
  double c1 = 0.1441 + 4 * 0.1230;
  double c2 = 2 * (0.1441 + 3 * 0.1230);
  double co = (-0.2035 + 3 * 0.1230) + (-0.2893 - 0.2677);
  double delta = ((c2 - c1) + (c1 - c2) + (c1 - co)) / 3.0;
  const auto& ed = j["editing"];
  const auto& lp = j["optimization"]["logp"];
  std::vector<std::string> wrong;
  auto expect = [&](const std::string& what, double got, double want, double tol) {
    if (std::abs(got - want) > tol) wrong.push_back(fmt("%s %.10g != %.10g", what.c_str(), got, want));
  };
  expect("pass@1", ed["all"]["pass_at_1"], 400.0 / 6.0, 1e-9);
  expect("validity", ed["all"]["validity"], 500.0 / 6.0, 1e-9);
  expect("add pass@1", ed["add"]["pass_at_1"], 200.0 / 3.0, 1e-9);
  expect("delete pass@1", ed["delete"]["pass_at_1"], 50.0, 1e-9);
  expect("delete validity", ed["delete"]["validity"], 50.0, 1e-9);
  expect("substitute pass@1", ed["substitute"]["pass_at_1"], 100.0, 1e-9);
  expect("delta", lp["delta"], delta, 1e-9);
  expect("sr", lp["sr"], 50.0, 1e-9);
  expect("logp count", lp["count"], 4, 0);
  expect("logp valid", lp["valid"], 3, 0);
  expect("rows", j["rows"], 13, 0);
  expect("rejected", j["rejected"], 3, 0);
  expect("issues", static_cast<double>(j["issues"].size()), 5, 0);
  std::string d = fmt("pass@1 %.2f%%, validity %.2f%%, logp delta %.9f, SR %.1f%%", ed["all"]["pass_at_1"].get<double>(),
                      ed["all"]["validity"].get<double>(), lp["delta"].get<double>(), lp["sr"].get<double>());
  for (const auto& w : wrong) d += "; " + w;
  return {wrong.empty(), d};
}

// ---------------------------------------------------------------------------
// 9. Determinism through the CLI

Outcome determinism() {
  fs::path dir = fs::temp_directory_path() / ("molact_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  std::string roll = "rollout --policy random --k 8 --seed 5 --tasks " + data_path("toy/stage1.jsonl") + " --out ";
  bool ran = testing::run_cli(roll + p("a.jsonl")).code == 0 && testing::run_cli(roll + p("b.jsonl")).code == 0;
  std::string ja = testing::slurp(p("a.jsonl"));
  bool same_jsonl = ran && !ja.empty() && ja == testing::slurp(p("b.jsonl"));

  std::string train = "train --config " + data_path("toy/two_stage.json");
  bool trained = testing::run_cli(train + " --curve " + p("a.csv") + " --checkpoint " + p("a")).code == 0 &&
                 testing::run_cli(train + " --curve " + p("b.csv") + " --checkpoint " + p("b")).code == 0;
  std::string ca = testing::slurp(p("a.csv"));
  bool same_csv = trained && !ca.empty() && ca == testing::slurp(p("b.csv"));
  bool same_ckpt = trained && testing::slurp(p("a.stage2.json")) == testing::slurp(p("b.stage2.json"));
  std::size_t lines = static_cast<std::size_t>(std::count(ja.begin(), ja.end(), '\n'));
  std::size_t rows = static_cast<std::size_t>(std::count(ca.begin(), ca.end(), '\n'));
  fs::remove_all(dir);
  return {same_jsonl && same_csv && same_ckpt,
          fmt("trajectory JSONL %s (%zu lines), curve CSV %s (%zu rows), checkpoint %s",
              same_jsonl ? "identical" : "DIFFERS", lines, same_csv ? "identical" : "DIFFERS", rows,
              same_ckpt ? "identical" : "DIFFERS")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace molact

int main(int argc, char** argv) {
  using namespace molact;
  const std::vector<Criterion> all = {
      {1, "validity gate", 60, validity_gate},
      {2, "edit count law", 120, edit_count_law},
      {3, "scripted editing benchmark", 10, scripted_benchmark},
      {4, "GRPO math", 30, grpo_math},
      {5, "toy two-stage curriculum", 300, toy_curriculum},
      {6, "descriptor oracles", 30, descriptor_oracles},
      {7, "canonical round trip", 60, canonical_round_trip},
      {8, "metrics fixture", 5, metrics_fixture},
      {9, "determinism", 60, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && secs < c.budget_s;
    failed += pass ? 0 : 1;
    std::printf("%s  %d  %-27s %7.2f s / %3.0f s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
