// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "molact/metrics.hpp"
#include "molact/train_config.hpp"
#include "support/oracles.hpp"

namespace molact {
namespace {

Task edit_task(std::string id, std::string source, EditKind op, std::string group, std::string add = "") {
  Task t;
  t.id = std::move(id);
  t.source = std::move(source);
  t.spec.op = op;
  t.spec.group = std::move(group);
  t.spec.add_group = std::move(add);
  return t;
}

Task opt_task(std::string id, std::string source, std::string oracle) {
  Task t;
  t.id = std::move(id);
  t.source = std::move(source);
  t.spec.stage = Stage::Optimization;
  t.spec.oracle = std::move(oracle);
  return t;
}

std::string rows(const std::vector<std::pair<std::string, std::string>>& r) {
  std::string s;
  for (const auto& [id, smi] : r) s += "{\"id\":\"" + id + "\",\"smiles\":\"" + smi + "\"}\n";
  return s;
}

MetricsReport run(const std::vector<Task>& tasks, const std::string& outputs, const OracleRegistry& reg) {
  std::istringstream in(outputs);
  return evaluate_outputs(tasks, in, default_catalog(), reg);
}

// Heavy-atom count times 0.1: gains are exact multiples of 0.1.
OracleRegistry size_registry() {
  OracleRegistry r;
  r.add(std::make_unique<FunctionOracle>(OracleSpec{"size", 0.5, OracleSource::Builtin},
                                         [](const Molecule& m) { return 0.1 * m.atom_count(); }));
  return r;
}

TEST(Metrics, NineOfTenEditsCorrect) {
  Catalog cat = default_catalog();
  std::vector<Task> tasks;
  std::vector<std::pair<std::string, std::string>> out;
  const char* hosts[] = {"C", "CC", "CCC", "CCCC", "C1CCCCC1", "c1ccccc1", "CC(C)C", "CCCCC", "CCN"};
  for (int i = 0; i < 9; ++i) {
    tasks.push_back(edit_task("t" + std::to_string(i), hosts[i], EditKind::Add, "chloro"));
    out.push_back({"t" + std::to_string(i), std::string("Cl") + hosts[i]});
  }
  tasks.push_back(edit_task("t9", "CCO", EditKind::Delete, "hydroxyl"));
  out.push_back({"t9", "C(C)(C)(C)(C)C"});

  // Each answer's chloro count rises by exactly one under the brute-force
  // counter, so nine pass by construction.
  const FunctionalGroup& cl = cat.at("chloro");
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(testing::brute_force_count(parse_smiles(out[i].second), cl),
              testing::brute_force_count(parse_smiles(hosts[i]), cl) + 1);
  }
  MetricsReport r = run(tasks, rows(out), builtin_registry());
  EXPECT_EQ(r.editing_total.count, 10);
  EXPECT_DOUBLE_EQ(r.editing_total.pass_at_1(), 90.0);
  EXPECT_DOUBLE_EQ(r.editing_total.validity(), 90.0);
  EXPECT_EQ(r.editing.at("add").passed, 9);
  EXPECT_EQ(r.editing.at("delete").valid, 0);
  EXPECT_EQ(r.rejected, 0);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].id, "t9");
}

TEST(Metrics, ValidWrongAnswerCountsForValidityOnly) {
  std::vector<Task> tasks{edit_task("a", "CC", EditKind::Add, "hydroxyl")};
  MetricsReport r = run(tasks, rows({{"a", "CCC"}}), builtin_registry());
  EXPECT_EQ(r.editing_total.valid, 1);
  EXPECT_EQ(r.editing_total.passed, 0);
}

TEST(Metrics, SubstituteNeedsBothCounts) {
  std::vector<Task> tasks{edit_task("a", "OCCC", EditKind::Substitute, "hydroxyl", "amine"),
                          edit_task("b", "OCCC", EditKind::Substitute, "hydroxyl", "amine")};
  MetricsReport r = run(tasks, rows({{"a", "NCCC"}, {"b", "CCC"}}), builtin_registry());
  EXPECT_EQ(r.editing.at("substitute").passed, 1);
}

TEST(Metrics, GainsAndSuccessRate) {
  std::vector<Task> tasks{opt_task("a", "C", "size"), opt_task("b", "CC", "size"), opt_task("c", "C", "size")};
  MetricsReport r = run(tasks, rows({{"a", "CCC"}, {"b", "C"}, {"c", "CCCCC"}}), size_registry());
  const OptStats& s = r.optimization.at("size");
  EXPECT_NEAR(s.delta(), (0.2 - 0.1 + 0.4) / 3.0, 1e-12);
  EXPECT_NEAR(s.delta(), 0.1667, 5e-5);
  EXPECT_NEAR(s.sr(), 200.0 / 3.0, 1e-12);
  EXPECT_EQ(s.improved, 2);
}

TEST(Metrics, InvalidOptimizationOutputExcludedFromDeltaCountedInSr) {
  std::vector<Task> tasks{opt_task("a", "C", "size"), opt_task("b", "C", "size")};
  MetricsReport r = run(tasks, rows({{"a", "CCC"}, {"b", "C(C)(C)(C)(C)C"}}), size_registry());
  const OptStats& s = r.optimization.at("size");
  EXPECT_EQ(s.count, 2);
  EXPECT_EQ(s.valid, 1);
  EXPECT_NEAR(s.delta(), 0.2, 1e-12);
  EXPECT_DOUBLE_EQ(s.sr(), 50.0);
}

TEST(Metrics, ZeroGainIsNotSuccess) {
  std::vector<Task> tasks{opt_task("a", "CC", "size")};
  MetricsReport r = run(tasks, rows({{"a", "CO"}}), size_registry());
  EXPECT_EQ(r.optimization.at("size").improved, 0);
  EXPECT_DOUBLE_EQ(r.optimization.at("size").delta(), 0.0);
}

TEST(Metrics, UnscorableOutputCountsInvalid) {
  std::vector<Task> tasks{opt_task("a", "CC", "logp")};
  MetricsReport r = run(tasks, rows({{"a", "C[C+]"}}), builtin_registry());
  const OptStats& s = r.optimization.at("logp");
  EXPECT_EQ(s.count, 1);
  EXPECT_EQ(s.valid, 0);
  ASSERT_EQ(r.issues.size(), 1u);
}

TEST(Metrics, EmptyOutputsGiveZeroReport) {
  std::vector<Task> tasks{edit_task("a", "CC", EditKind::Add, "hydroxyl"), opt_task("b", "C", "logp")};
  MetricsReport r = run(tasks, "\n\n", builtin_registry());
  EXPECT_EQ(r.rows, 0);
  EXPECT_EQ(r.editing_total.count, 0);
  EXPECT_DOUBLE_EQ(r.editing_total.pass_at_1(), 0.0);
  EXPECT_TRUE(r.optimization.empty());
  EXPECT_TRUE(r.issues.empty());
}

TEST(Metrics, RejectedRows) {
  std::vector<Task> tasks{edit_task("a", "CC", EditKind::Add, "hydroxyl")};
  std::string out = rows({{"a", "CCO"}, {"a", "CCC"}, {"nope", "C"}}) + "{\"smiles\": \"C\"}\nnot json\n";
  MetricsReport r = run(tasks, out, builtin_registry());
  EXPECT_EQ(r.rows, 5);
  EXPECT_EQ(r.rejected, 4);
  EXPECT_EQ(r.editing_total.count, 1);
  EXPECT_EQ(r.editing_total.passed, 1);
  ASSERT_EQ(r.issues.size(), 4u);
  EXPECT_EQ(r.issues[0].line, 2);
  EXPECT_EQ(r.issues[3].line, 5);
}

TEST(Metrics, MissingSmilesIsInvalidOutput) {
  std::vector<Task> tasks{edit_task("a", "CC", EditKind::Add, "hydroxyl")};
  MetricsReport r = run(tasks, "{\"id\":\"a\"}\n", builtin_registry());
  EXPECT_EQ(r.editing_total.count, 1);
  EXPECT_EQ(r.editing_total.valid, 0);
}

TEST(Metrics, DuplicateTaskIdsRejected) {
  std::vector<Task> tasks{opt_task("a", "C", "logp"), opt_task("a", "CC", "logp")};
  EXPECT_THROW(run(tasks, "", builtin_registry()), TaskFormatError);
}

TEST(Metrics, FixtureFilesMatchHandCounts) {
  Catalog cat = default_catalog();
  auto tasks = load_tasks(testing::data_path("eval/tasks.jsonl"), cat);
  std::ifstream in(testing::data_path("eval/outputs.jsonl"));
  OracleRegistry reg = builtin_registry();
  MetricsReport r = evaluate_outputs(tasks, in, cat, reg);
  EXPECT_EQ(r.editing_total.count, 6);
  EXPECT_EQ(r.editing_total.passed, 4);
  EXPECT_EQ(r.editing_total.valid, 5);
  EXPECT_EQ(r.rows, 13);
  EXPECT_EQ(r.rejected, 3);
  // logp gains from the atom table: C->CC +0.3901, CC->C -0.3901, CO->C +1.0276.
  EXPECT_NEAR(r.optimization.at("logp").delta(), 1.0276 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.optimization.at("logp").sr(), 50.0);

  std::ifstream again(testing::data_path("eval/outputs.jsonl"));
  EXPECT_EQ(report_to_json(evaluate_outputs(tasks, again, cat, reg)).dump(), report_to_json(r).dump());
}

TEST(Metrics, PercentagesStayInRange) {
  std::mt19937_64 rng(5);
  const char* answers[] = {"CCO", "CC", "C1CC", "NCC", "C(C)(C)(C)(C)C", "CCCl"};
  std::vector<Task> tasks;
  for (int i = 0; i < 30; ++i) tasks.push_back(edit_task("t" + std::to_string(i), "CC", EditKind::Add, "hydroxyl"));
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < 30; ++i) {
    if (rng() % 4 == 0) continue;
    out.push_back({"t" + std::to_string(i), answers[rng() % 6]});
  }
  MetricsReport r = run(tasks, rows(out), builtin_registry());
  for (const auto& [op, s] : r.editing) {
    EXPECT_GE(s.pass_at_1(), 0.0);
    EXPECT_LE(s.pass_at_1(), 100.0);
    EXPECT_LE(s.passed, s.valid);
    EXPECT_LE(s.valid, s.count);
  }
}

// ---------------------------------------------------------------------------

TEST(RunConfig, DefaultsAndPathResolution) {
  auto j = nlohmann::json::parse(R"({"stages": [{"name": "editing", "tasks": "t.jsonl", "iterations": 5}]})");
  RunConfig c = run_config_from_json(j, "/base/dir");
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.train.k, 8);
  EXPECT_EQ(c.stages[0].tasks, "/base/dir/t.jsonl");
  EXPECT_EQ(c.curve, "curve.csv");
  EXPECT_EQ(c.checkpoint_path(2), "policy.stage2.json");
  auto echoed = run_config_to_json(c);
  EXPECT_EQ(echoed["eps_clip"].get<double>(), kDefaultClip);
  EXPECT_TRUE(echoed["catalog"].is_null());
}

TEST(RunConfig, EchoRoundTrips) {
  auto j = nlohmann::json::parse(R"({"seed": 3, "k": 4, "groups": ["amine"], "catalog": "/c.json",
      "stages": [{"name": "a", "tasks": "/x.jsonl", "iterations": 1}, {"name": "b", "tasks": "/y.jsonl", "iterations": 2}]})");
  RunConfig c = run_config_from_json(j, "/ignored");
  RunConfig d = run_config_from_json(nlohmann::json::parse(run_config_to_json(c).dump()), "/other");
  EXPECT_EQ(run_config_to_json(c).dump(), run_config_to_json(d).dump());
}

TEST(RunConfig, Rejections) {
  auto bad = [](const char* text) { return run_config_from_json(nlohmann::json::parse(text), "."); };
  EXPECT_THROW(bad(R"({"stages": []})"), ConfigError);
  EXPECT_THROW(bad(R"({"k": 8})"), ConfigError);
  EXPECT_THROW(bad(R"({"stagse": [], "stages": [{"name": "a", "tasks": "t", "iterations": 1}]})"), ConfigError);
  EXPECT_THROW(bad(R"({"k": 0, "stages": [{"name": "a", "tasks": "t", "iterations": 1}]})"), ConfigError);
  EXPECT_THROW(bad(R"({"learning_rate": -1, "stages": [{"name": "a", "tasks": "t", "iterations": 1}]})"), ConfigError);
  EXPECT_THROW(bad(R"({"stages": [{"name": "a,b", "tasks": "t", "iterations": 1}]})"), ConfigError);
  EXPECT_THROW(bad(R"({"k": "eight", "stages": [{"name": "a", "tasks": "t", "iterations": 1}]})"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST(RunConfig, ShippedToyRunsLoad) {
  for (const char* name : {"toy/two_stage.json", "toy/one_stage.json"}) {
    RunConfig c = load_run_config(testing::data_path(name));
    Catalog cat = catalog_subset(default_catalog(), c.groups);
    for (const auto& s : c.stages) EXPECT_FALSE(load_tasks(s.tasks, cat).empty()) << s.tasks;
  }
}

}  // namespace
}  // namespace molact
