// Copyright 2026 The balopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Multi-trajectory comparison of search methods on a shared objective.
// Every method runs the same number of independent trajectories (seeds
// base_seed + t); reported per method are the trajectory-averaged
// best-so-far curve, its prefix means AUC@k, and n-95, the first trial index
// whose mean curve reaches 95% of the best mean performance attained by any
// method within the budget.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "balopt/engine.hpp"
#include "balopt/errors.hpp"
#include "balopt/objective.hpp"
#include "balopt/reparam.hpp"
#include "balopt/text.hpp"

namespace balopt {

struct MethodSpec {
  enum class Kind { coordinate_descent, random_search };

  std::string name;
  Kind kind = Kind::coordinate_descent;
  // Coordinate-descent settings; ignored by random search.
  ReparamMatrix matrix = preset_matrix("balance");
  std::array<int, 3> budgets{3, 3, 3};
  double slope_threshold = 0.02;
  double budget_multiplier = 2.0;
  bool reverse_directions = false;
  // Fixed warm start; when absent each trajectory draws its own start
  // log-uniformly from the search space.
  std::optional<HyperConfig> fixed_start;
};

struct ComparisonSpec {
  std::string objective_ref;
  std::optional<SearchSpace> space;  // defaults to a grid objective's hull
  std::vector<MethodSpec> methods;
  int budget = 50;
  int trajectories = 80;
  std::uint64_t base_seed = 1;
  std::vector<int> auc_checkpoints{10, 20};
  int threads = 1;
  double cmd_timeout_seconds = 0.0;
};

inline void validate(const ComparisonSpec& spec) {
  if (spec.methods.empty()) throw InvalidConfig("comparison needs >= 1 method");
  if (spec.trajectories < 1)
    throw InvalidConfig("comparison needs >= 1 trajectory");
  if (spec.budget < 1) throw InvalidConfig("comparison budget must be >= 1");
  if (spec.auc_checkpoints.empty())
    throw InvalidConfig("comparison needs >= 1 AUC checkpoint");
  for (int k : spec.auc_checkpoints)
    if (k < 1 || k > spec.budget)
      throw InvalidConfig(
          "AUC checkpoints must lie in [1, budget]; budget must cover the "
          "largest checkpoint");
  std::vector<std::string> names;
  for (const auto& m : spec.methods) {
    if (m.name.empty()) throw InvalidConfig("method name must not be empty");
    names.push_back(m.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw InvalidConfig("method names must be unique");
}

struct MethodReport {
  std::string name;
  std::vector<double> mean_curve;  // length = budget
  std::vector<std::vector<double>> trajectory_curves;
  std::vector<std::pair<int, double>> auc;  // (checkpoint, value)
  std::optional<int> n95;                   // empty: not reached in budget
};

inline std::vector<double> best_so_far(const TrialHistory& history) {
  if (history.trials.empty()) throw InvalidConfig("empty trial history");
  return history.best_so_far();
}

// Mean of the first k curve values.
inline double auc_at(const std::vector<double>& curve, int k) {
  if (k < 1 || static_cast<size_t>(k) > curve.size())
    throw InsufficientBudget("AUC checkpoint " + std::to_string(k) +
                             " exceeds the curve length " +
                             std::to_string(curve.size()));
  double sum = 0.0;
  for (int t = 0; t < k; ++t) sum += curve[static_cast<size_t>(t)];
  return sum / static_cast<double>(k);
}

// Smallest trial index at which each mean curve reaches 95% of the best mean
// performance any method attains within the budget; empty when unreached.
inline std::vector<std::optional<int>> n95(
    const std::vector<std::vector<double>>& mean_curves, int budget) {
  if (mean_curves.empty()) throw InvalidConfig("n95 needs >= 1 method");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& curve : mean_curves)
    for (size_t t = 0; t < std::min(curve.size(), size_t(budget)); ++t)
      best = std::max(best, curve[t]);
  const double threshold = 0.95 * best;
  std::vector<std::optional<int>> out;
  for (const auto& curve : mean_curves) {
    std::optional<int> reached;
    for (size_t t = 0; t < std::min(curve.size(), size_t(budget)); ++t)
      if (curve[t] >= threshold) {
        reached = static_cast<int>(t) + 1;
        break;
      }
    out.push_back(reached);
  }
  return out;
}

inline std::string format_n95(const std::optional<int>& value, int budget) {
  return value ? std::to_string(*value) : ">" + std::to_string(budget);
}

namespace detail {

// One trajectory of one method. Curves are padded with their final value so
// every trajectory reports exactly `budget` entries even if the search
// exhausted its lines early.
inline std::vector<double> run_trajectory(const Objective& objective,
                                          const SearchSpace& space,
                                          const MethodSpec& method, int budget,
                                          std::uint64_t seed) {
  TrialHistory history;
  if (method.kind == MethodSpec::Kind::random_search) {
    history = random_search(objective, space, budget, seed);
  } else {
    std::mt19937_64 rng(seed);
    CdSettings settings;
    settings.start = method.fixed_start
                         ? *method.fixed_start
                         : sample_log_uniform(space, rng);
    settings.directions = method.matrix;
    settings.space = space;
    settings.budget.per_direction = method.budgets;
    settings.budget.slope_threshold = method.slope_threshold;
    settings.budget.multiplier = method.budget_multiplier;
    settings.budget.total = budget;
    settings.reverse_directions = method.reverse_directions;
    history = coordinate_descent(objective, settings);
  }
  auto curve = history.best_so_far();
  if (curve.empty()) throw Error("trajectory produced no trials");
  curve.resize(size_t(budget), curve.back());
  return curve;
}

}  // namespace detail

inline std::vector<MethodReport> run_comparison(const ComparisonSpec& spec,
                                                const Objective& objective,
                                                const SearchSpace& space) {
  validate(spec);
  validate(space);

  struct Job {
    size_t method;
    int trajectory;
  };
  std::vector<Job> jobs;
  for (size_t m = 0; m < spec.methods.size(); ++m)
    for (int t = 0; t < spec.trajectories; ++t) jobs.push_back({m, t});

  std::vector<std::vector<std::vector<double>>> curves(spec.methods.size());
  for (auto& per_method : curves)
    per_method.resize(size_t(spec.trajectories));

  const auto run_job = [&](const Job& job) {
    curves[job.method][size_t(job.trajectory)] = detail::run_trajectory(
        objective, space, spec.methods[job.method], spec.budget,
        spec.base_seed + static_cast<std::uint64_t>(job.trajectory));
  };

  const int thread_count =
      std::max(1, std::min<int>(spec.threads, int(jobs.size())));
  if (thread_count == 1) {
    for (const auto& job : jobs) run_job(job);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (int w = 0; w < thread_count; ++w)
      workers.emplace_back([&] {
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          try {
            run_job(jobs[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<MethodReport> reports;
  std::vector<std::vector<double>> mean_curves;
  for (size_t m = 0; m < spec.methods.size(); ++m) {
    MethodReport report;
    report.name = spec.methods[m].name;
    report.trajectory_curves = curves[m];
    report.mean_curve.assign(size_t(spec.budget), 0.0);
    for (const auto& curve : curves[m])
      for (size_t t = 0; t < size_t(spec.budget); ++t)
        report.mean_curve[t] += curve[t];
    for (auto& v : report.mean_curve) v /= double(spec.trajectories);
    for (int k : spec.auc_checkpoints)
      report.auc.emplace_back(k, auc_at(report.mean_curve, k));
    mean_curves.push_back(report.mean_curve);
    reports.push_back(std::move(report));
  }
  const auto thresholds = n95(mean_curves, spec.budget);
  for (size_t m = 0; m < reports.size(); ++m) reports[m].n95 = thresholds[m];
  return reports;
}

// Loads the objective named by the spec and resolves the search space.
inline std::vector<MethodReport> run_comparison(const ComparisonSpec& spec) {
  validate(spec);
  const auto loaded = load_objective(spec.objective_ref,
                                     spec.cmd_timeout_seconds,
                                     spec.threads > 1);
  SearchSpace space;
  if (spec.space)
    space = *spec.space;
  else if (loaded.natural_space)
    space = *loaded.natural_space;
  else
    throw InvalidConfig("objective '" + spec.objective_ref +
                        "' has no intrinsic range; the spec must name a "
                        "search space");
  return run_comparison(spec, *loaded.objective, space);
}

// ---------------------------------------------------------------------------
// JSON spec and report formats

namespace detail {

inline nlohmann::json space_to_json(const SearchSpace& s) {
  nlohmann::json out;
  for (int i = 0; i < 3; ++i) {
    const auto& d = s.dims[size_t(i)];
    const std::string key(kDimNames[size_t(i)]);
    if (d.lo == d.hi)
      out[key] = d.lo;
    else
      out[key] = {d.lo, d.hi};
  }
  return out;
}

inline nlohmann::json matrix_to_json(const ReparamMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : m.rows)
    for (double v : row) out.push_back(v);
  return out;
}

inline std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
            c == '_')
               ? c
               : '_';
  return out;
}

}  // namespace detail

inline nlohmann::json comparison_spec_to_json(const ComparisonSpec& spec) {
  nlohmann::json doc;
  doc["objective"] = spec.objective_ref;
  if (spec.space) doc["space"] = detail::space_to_json(*spec.space);
  doc["budget"] = spec.budget;
  doc["trajectories"] = spec.trajectories;
  doc["base_seed"] = spec.base_seed;
  doc["auc_checkpoints"] = spec.auc_checkpoints;
  doc["threads"] = spec.threads;
  if (spec.cmd_timeout_seconds > 0.0)
    doc["cmd_timeout"] = spec.cmd_timeout_seconds;
  doc["methods"] = nlohmann::json::array();
  for (const auto& m : spec.methods) {
    nlohmann::json jm;
    jm["name"] = m.name;
    jm["kind"] = m.kind == MethodSpec::Kind::random_search ? "random" : "cd";
    if (m.kind == MethodSpec::Kind::coordinate_descent) {
      jm["matrix"] = detail::matrix_to_json(m.matrix);
      jm["budgets"] = m.budgets;
      jm["slope_threshold"] = m.slope_threshold;
      jm["multiplier"] = m.budget_multiplier;
      jm["reverse"] = m.reverse_directions;
      if (m.fixed_start)
        jm["start"] = {m.fixed_start->lambda_p_rate,
                       m.fixed_start->lambda_e_rate,
                       m.fixed_start->batch_size};
    }
    doc["methods"].push_back(jm);
  }
  return doc;
}

inline ComparisonSpec parse_comparison_spec(const nlohmann::json& doc_in) {
  // An emitted report embeds the spec it was produced from; accept both.
  const nlohmann::json& doc =
      doc_in.contains("spec") ? doc_in.at("spec") : doc_in;
  ComparisonSpec spec;
  try {
    spec.objective_ref = doc.at("objective").get<std::string>();
    if (doc.contains("space"))
      spec.space = parse_search_space(doc.at("space").dump());
    if (doc.contains("space_file"))
      spec.space = load_search_space(doc.at("space_file").get<std::string>());
    if (doc.contains("budget")) spec.budget = doc.at("budget").get<int>();
    if (doc.contains("trajectories"))
      spec.trajectories = doc.at("trajectories").get<int>();
    if (doc.contains("base_seed"))
      spec.base_seed = doc.at("base_seed").get<std::uint64_t>();
    if (doc.contains("auc_checkpoints"))
      spec.auc_checkpoints =
          doc.at("auc_checkpoints").get<std::vector<int>>();
    if (doc.contains("threads")) spec.threads = doc.at("threads").get<int>();
    if (doc.contains("cmd_timeout"))
      spec.cmd_timeout_seconds = doc.at("cmd_timeout").get<double>();
    for (const auto& jm : doc.at("methods")) {
      MethodSpec m;
      m.name = jm.at("name").get<std::string>();
      const auto kind = jm.value("kind", std::string("cd"));
      if (kind == "random" || kind == "random-search")
        m.kind = MethodSpec::Kind::random_search;
      else if (kind == "cd" || kind == "coordinate-descent")
        m.kind = MethodSpec::Kind::coordinate_descent;
      else
        throw FormatError("unknown method kind '" + kind + "'");
      if (jm.contains("matrix")) {
        const auto& jmat = jm.at("matrix");
        if (jmat.is_string())
          m.matrix = preset_matrix(jmat.get<std::string>());
        else
          for (int i = 0; i < 9; ++i)
            m.matrix.rows[size_t(i) / 3][size_t(i) % 3] =
                jmat.at(size_t(i)).get<double>();
      }
      if (jm.contains("budgets")) {
        const auto values = jm.at("budgets").get<std::vector<int>>();
        if (values.empty() || values.size() > 3)
          throw FormatError("budgets needs 1-3 entries");
        for (size_t i = 0; i < 3; ++i)
          m.budgets[i] = values[std::min(i, values.size() - 1)];
      }
      if (jm.contains("slope_threshold"))
        m.slope_threshold = jm.at("slope_threshold").get<double>();
      if (jm.contains("multiplier"))
        m.budget_multiplier = jm.at("multiplier").get<double>();
      if (jm.contains("reverse"))
        m.reverse_directions = jm.at("reverse").get<bool>();
      if (jm.contains("start")) {
        const auto& js = jm.at("start");
        m.fixed_start = HyperConfig{js.at(0).get<double>(),
                                    js.at(1).get<double>(),
                                    js.at(2).get<double>()};
      }
      spec.methods.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("comparison spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline ComparisonSpec load_comparison_spec(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("comparison spec '" + path + "': " + e.what());
  }
  return parse_comparison_spec(doc);
}

// Writes summary.csv (method, AUC columns, n95), one mean-curve CSV per
// method, and report.json carrying the spec plus full per-trajectory curves.
// Returns the written paths.
inline std::vector<std::string> emit_report(
    const std::vector<MethodReport>& reports, const ComparisonSpec& spec,
    const std::string& out_dir) {
  if (reports.empty()) throw InvalidConfig("nothing to report");
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  std::string summary = "method";
  for (const auto& [k, value] : reports.front().auc) {
    summary += ",auc@" + std::to_string(k);
    (void)value;
  }
  summary += ",n95\n";
  for (const auto& report : reports) {
    summary += report.name;
    for (const auto& [k, value] : report.auc)
      summary += "," + text::format_double(value);
    summary += "," + format_n95(report.n95, spec.budget) + "\n";
  }
  const auto summary_path =
      (std::filesystem::path(out_dir) / "summary.csv").string();
  text::write_file(summary_path, summary);
  written.push_back(summary_path);

  for (const auto& report : reports) {
    std::string curve = "trial,mean_best\n";
    for (size_t t = 0; t < report.mean_curve.size(); ++t)
      curve += std::to_string(t + 1) + "," +
               text::format_double(report.mean_curve[t]) + "\n";
    const auto curve_path =
        (std::filesystem::path(out_dir) /
         ("curve_" + detail::sanitize_filename(report.name) + ".csv"))
            .string();
    text::write_file(curve_path, curve);
    written.push_back(curve_path);
  }

  nlohmann::json doc;
  doc["spec"] = comparison_spec_to_json(spec);
  doc["results"] = nlohmann::json::array();
  for (const auto& report : reports) {
    nlohmann::json jr;
    jr["method"] = report.name;
    for (const auto& [k, value] : report.auc)
      jr["auc"][std::to_string(k)] = value;
    jr["n95"] = report.n95 ? nlohmann::json(*report.n95)
                           : nlohmann::json(format_n95(report.n95, spec.budget));
    jr["mean_curve"] = report.mean_curve;
    jr["trajectories"] = report.trajectory_curves;
    doc["results"].push_back(jr);
  }
  const auto json_path =
      (std::filesystem::path(out_dir) / "report.json").string();
  text::write_file(json_path, doc.dump(2) + "\n");
  written.push_back(json_path);
  return written;
}

}  // namespace balopt
