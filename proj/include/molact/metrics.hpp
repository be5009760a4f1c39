// SPDX-License-Identifier: Apache-2.0
//
// Benchmark metrics over a task file and an output file of {"id", "smiles"}
// rows. Editing outputs pass when they are valid and satisfy the count
// equation of the instructed operator. Optimization outputs contribute
// p(pred) - p(src) to the mean gain when valid; SR counts strictly positive
// gains over all outputs, so invalid outputs are failures.

#ifndef MOLACT_METRICS_HPP_
#define MOLACT_METRICS_HPP_

#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "molact/descriptors.hpp"
#include "molact/error.hpp"
#include "molact/fg_catalog.hpp"
#include "molact/oracle.hpp"
#include "molact/reward.hpp"
#include "molact/smiles.hpp"
#include "molact/tasks.hpp"
#include "molact/validity.hpp"

namespace molact {

struct OutputRow {
  std::string id;
  std::string smiles;
};

/// A rejected or invalid output line. `line` is 1-based.
struct RowIssue {
  int line = 0;
  std::string id;
  std::string message;
};

inline double percent(int num, int den) { return den == 0 ? 0.0 : 100.0 * num / den; }

struct EditStats {
  int count = 0;
  int valid = 0;
  int passed = 0;
  double similarity_sum = 0.0;  // Tanimoto to the reference (or source), valid outputs

  double pass_at_1() const { return percent(passed, count); }
  double validity() const { return percent(valid, count); }
  double mean_similarity() const { return valid == 0 ? 0.0 : similarity_sum / valid; }
};

struct OptStats {
  int count = 0;
  int valid = 0;
  int improved = 0;
  double gain_sum = 0.0;

  double delta() const { return valid == 0 ? 0.0 : gain_sum / valid; }
  double sr() const { return percent(improved, count); }
  double validity() const { return percent(valid, count); }
};

struct MetricsReport {
  std::map<std::string, EditStats> editing;      // keyed by operator
  std::map<std::string, OptStats> optimization;  // keyed by oracle
  EditStats editing_total;
  int rows = 0;      // non-blank output lines
  int rejected = 0;  // lines that could not be attributed to a task
  std::vector<RowIssue> issues;
};

/// Scores one editing answer.
inline void score_edit_output(EditStats& s, const Task& task, const Molecule& src, const std::optional<Molecule>& pred,
                              const Catalog& catalog) {
  ++s.count;
  if (!pred || !is_valid(*pred)) return;
  ++s.valid;
  if (edit_task_reward(src, *pred, task.spec, catalog) == 1) ++s.passed;
  s.similarity_sum += tanimoto(*pred, reference_molecule(src, task.spec));
}

/// Computes the report. Rows with malformed JSON, unknown ids or repeated
/// ids are rejected; rows whose SMILES does not parse or whose property
/// cannot be computed count as invalid outputs. Both are listed in `issues`.
inline MetricsReport evaluate_outputs(const std::vector<Task>& tasks, std::istream& outputs, const Catalog& catalog,
                                      const OracleRegistry& oracles) {
  std::map<std::string, const Task*> by_id;
  for (const auto& t : tasks) {
    if (!by_id.emplace(t.id, &t).second) throw TaskFormatError("duplicate task id '" + t.id + "'");
  }
  MetricsReport rep;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(outputs, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++rep.rows;
    auto reject = [&](std::string id, std::string msg) {
      ++rep.rejected;
      rep.issues.push_back({lineno, std::move(id), std::move(msg)});
    };
    OutputRow row;
    try {
      auto j = nlohmann::json::parse(line);
      row.id = j.at("id").get<std::string>();
      if (j.contains("smiles") && j["smiles"].is_string()) row.smiles = j["smiles"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      reject("", std::string("malformed row: ") + e.what());
      continue;
    }
    auto it = by_id.find(row.id);
    if (it == by_id.end()) {
      reject(row.id, "unknown task id");
      continue;
    }
    if (!seen.insert(row.id).second) {
      reject(row.id, "repeated task id");
      continue;
    }
    const Task& task = *it->second;
    Molecule src = parse_smiles(task.source);
    std::optional<Molecule> pred;
    try {
      pred = parse_smiles(row.smiles);
    } catch (const ParseError& e) {
      rep.issues.push_back({lineno, row.id, std::string("unparseable SMILES: ") + e.what()});
    }
    if (pred && !is_valid(*pred)) {
      rep.issues.push_back({lineno, row.id, "invalid molecule: " + check_validity(*pred).violations.front()});
      pred.reset();
    }

    if (task.spec.stage == Stage::Editing) {
      score_edit_output(rep.editing[std::string(edit_kind_name(task.spec.op))], task, src, pred, catalog);
      score_edit_output(rep.editing_total, task, src, pred, catalog);
      continue;
    }
    OptStats& s = rep.optimization[task.spec.oracle];
    ++s.count;
    if (!pred) continue;
    double gain = 0.0;
    try {
      PropertyOracle& o = oracles.at(task.spec.oracle);
      gain = o.evaluate(*pred) - o.evaluate(src);
    } catch (const Error& e) {
      rep.issues.push_back({lineno, row.id, std::string("property failed: ") + e.what()});
      continue;
    }
    ++s.valid;
    s.gain_sum += gain;
    if (gain > 0.0) ++s.improved;
  }
  return rep;
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  using oj = nlohmann::ordered_json;
  auto edit = [](const EditStats& s) {
    return oj{{"count", s.count},         {"valid", s.valid},       {"passed", s.passed},
              {"pass_at_1", s.pass_at_1()}, {"validity", s.validity()}, {"similarity", s.mean_similarity()}};
  };
  oj j;
  oj ed = oj::object();
  for (const auto& [op, s] : r.editing) ed[op] = edit(s);
  ed["all"] = edit(r.editing_total);
  j["editing"] = ed;
  oj opt = oj::object();
  for (const auto& [name, s] : r.optimization) {
    opt[name] = oj{{"count", s.count},      {"valid", s.valid}, {"improved", s.improved},
                   {"delta", s.delta()},    {"sr", s.sr()},     {"validity", s.validity()}};
  }
  j["optimization"] = opt;
  j["rows"] = r.rows;
  j["rejected"] = r.rejected;
  oj issues = oj::array();
  for (const auto& i : r.issues) issues.push_back(oj{{"line", i.line}, {"id", i.id}, {"message", i.message}});
  j["issues"] = issues;
  return j;
}

inline void print_report(std::ostream& out, const MetricsReport& r) {
  char buf[200];
  out << "editing        count  pass@1%  valid%   sim\n";
  auto edit_row = [&](const std::string& name, const EditStats& s) {
    std::snprintf(buf, sizeof buf, "  %-12s %5d  %7.2f  %6.2f  %5.3f\n", name.c_str(), s.count, s.pass_at_1(),
                  s.validity(), s.mean_similarity());
    out << buf;
  };
  for (const auto& [op, s] : r.editing) edit_row(op, s);
  edit_row("all", r.editing_total);
  out << "optimization   count    delta     sr%  valid%\n";
  for (const auto& [name, s] : r.optimization) {
    std::snprintf(buf, sizeof buf, "  %-12s %5d  %+7.4f  %6.2f  %6.2f\n", name.c_str(), s.count, s.delta(), s.sr(),
                  s.validity());
    out << buf;
  }
  out << "rows " << r.rows << ", rejected " << r.rejected << '\n';
  for (const auto& i : r.issues) {
    out << "  line " << i.line << (i.id.empty() ? "" : " (" + i.id + ")") << ": " << i.message << '\n';
  }
}

}  // namespace molact

#endif  // MOLACT_METRICS_HPP_
