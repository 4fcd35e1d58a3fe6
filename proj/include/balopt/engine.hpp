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
// Derivative-free hyperparameter search: coordinate descent over the rows of
// a log-space direction matrix, each step a bounded golden-section line
// search, plus a log-uniform random-search baseline.
//
// Budget accounting is in fresh objective evaluations. Every probe is cached
// per trajectory; re-probing a configuration (within relative 1e-9 in log
// coordinates) is free, which lets a revisited line resume its golden-section
// sequence where the previous visit stopped.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "balopt/errors.hpp"
#include "balopt/objective.hpp"
#include "balopt/reparam.hpp"

namespace balopt {

struct Trial {
  int index = 0;  // ordinal of the budget-consuming evaluation, from 1;
                  // a cached trial repeats the index of its source
  HyperConfig config;
  double score = 0.0;
  bool cached = false;
};

struct TrialHistory {
  std::vector<Trial> trials;

  int fresh_count() const {
    int n = 0;
    for (const auto& t : trials) n += t.cached ? 0 : 1;
    return n;
  }

  // Running maximum over budget-consuming trials only.
  std::vector<double> best_so_far() const {
    std::vector<double> curve;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& t : trials) {
      if (t.cached) continue;
      best = std::max(best, t.score);
      curve.push_back(best);
    }
    return curve;
  }

  // Earliest trial attaining the maximum score.
  const Trial* best() const {
    const Trial* out = nullptr;
    for (const auto& t : trials)
      if (out == nullptr || t.score > out->score) out = &t;
    return out;
  }
};

namespace detail {

inline constexpr double kCacheRelTol = 1e-9;

inline bool log_coords_close(const std::array<double, 3>& a,
                             const std::array<double, 3>& b) {
  for (int i = 0; i < 3; ++i) {
    const double tol =
        kCacheRelTol * std::max({1.0, std::abs(a[size_t(i)]), std::abs(b[size_t(i)])});
    if (std::abs(a[size_t(i)] - b[size_t(i)]) > tol) return false;
  }
  return true;
}

}  // namespace detail

// Per-trajectory score memory keyed by log coordinates.
class EvalCache {
 public:
  struct Entry {
    std::array<double, 3> log_h;
    double score;
    int index;
  };

  const Entry* find(const std::array<double, 3>& log_h) const {
    for (const auto& e : entries_)
      if (detail::log_coords_close(e.log_h, log_h)) return &e;
    return nullptr;
  }

  void insert(const std::array<double, 3>& log_h, double score, int index) {
    entries_.push_back({log_h, score, index});
  }

 private:
  std::vector<Entry> entries_;
};

struct EvalOutcome {
  double score = 0.0;
  bool fresh = false;
};

// Budget counting, caching, and trial recording for one trajectory. A probe
// that throws is recorded with score -inf; the search continues.
class Evaluator {
 public:
  explicit Evaluator(const Objective& objective) : objective_(&objective) {}

  EvalOutcome evaluate(const HyperConfig& h) {
    const auto key = log_array(h);
    if (const auto* hit = cache_.find(key)) {
      history_.trials.push_back({hit->index, h, hit->score, true});
      return {hit->score, false};
    }
    double score;
    try {
      score = objective_->evaluate(h);
    } catch (const Error&) {
      score = -std::numeric_limits<double>::infinity();
    }
    if (std::isnan(score)) score = -std::numeric_limits<double>::infinity();
    ++fresh_;
    cache_.insert(key, score, fresh_);
    history_.trials.push_back({fresh_, h, score, false});
    return {score, true};
  }

  // True if evaluating h would consume budget.
  bool would_be_fresh(const HyperConfig& h) const {
    return cache_.find(log_array(h)) == nullptr;
  }

  int fresh_count() const { return fresh_; }
  const TrialHistory& history() const { return history_; }
  TrialHistory take_history() { return std::move(history_); }

 private:
  const Objective* objective_;
  EvalCache cache_;
  TrialHistory history_;
  int fresh_ = 0;
};

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Intersection of the line  log h(gamma) = log anchor + gamma * direction
// with the box constraints of the space, expressed in gamma. Contains 0.
inline Bracket compute_bracket(const HyperConfig& anchor,
                               const std::array<double, 3>& direction,
                               const SearchSpace& space) {
  validate(space);
  if (!contains(space, anchor))
    throw InvalidStart("line-search anchor lies outside the search space");
  bool any_nonzero = false;
  for (double v : direction) any_nonzero |= v != 0.0;
  if (!any_nonzero)
    throw InvalidConfig("line-search direction is the zero vector");

  const auto log_anchor = log_array(anchor);
  Bracket b{-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  for (int i = 0; i < 3; ++i) {
    const double a = direction[size_t(i)];
    if (a == 0.0) continue;
    const double to_lo =
        (std::log(space.dims[size_t(i)].lo) - log_anchor[size_t(i)]) / a;
    const double to_hi =
        (std::log(space.dims[size_t(i)].hi) - log_anchor[size_t(i)]) / a;
    b.lo = std::max(b.lo, std::min(to_lo, to_hi));
    b.hi = std::min(b.hi, std::max(to_lo, to_hi));
  }
  // The anchor itself sits at gamma = 0; roundoff must not exclude it.
  b.lo = std::min(b.lo, 0.0);
  b.hi = std::max(b.hi, 0.0);
  return b;
}

struct LineSearchResult {
  HyperConfig best;
  double best_score = 0.0;
  double best_gamma = 0.0;
  int fresh_used = 0;
  Bracket bracket;
};

inline constexpr double kGoldenRatio = 0.6180339887498949;
inline constexpr double kBracketResolution = 1e-12;

// Golden-section maximization of the objective along one direction, bounded
// by the search space. Consumes at most `budget` fresh evaluations; cache
// hits are free. The returned configuration is never worse than the anchor.
inline LineSearchResult line_search(Evaluator& eval, const HyperConfig& anchor,
                                    double anchor_score,
                                    const std::array<double, 3>& direction,
                                    int budget, const SearchSpace& space) {
  LineSearchResult res;
  res.best = anchor;
  res.best_score = anchor_score;
  res.best_gamma = 0.0;
  res.bracket = compute_bracket(anchor, direction, space);
  if (budget <= 0 || res.bracket.width() <= 0.0) return res;

  const auto log_anchor = log_array(anchor);
  const auto config_at = [&](double gamma) {
    std::array<double, 3> log_h;
    for (int i = 0; i < 3; ++i)
      log_h[size_t(i)] = log_anchor[size_t(i)] + gamma * direction[size_t(i)];
    return clamp(space, exp_config(log_h));
  };
  // nullopt once the next evaluation would exceed the budget.
  const auto try_probe = [&](double gamma) -> std::optional<double> {
    const auto h = config_at(gamma);
    if (eval.would_be_fresh(h) && res.fresh_used >= budget)
      return std::nullopt;
    const auto out = eval.evaluate(h);
    if (out.fresh) ++res.fresh_used;
    if (out.score > res.best_score) {
      res.best = h;
      res.best_score = out.score;
      res.best_gamma = gamma;
    }
    return out.score;
  };

  double lo = res.bracket.lo, hi = res.bracket.hi;
  double g1 = hi - kGoldenRatio * (hi - lo);
  double g2 = lo + kGoldenRatio * (hi - lo);
  auto f1 = try_probe(g1);
  if (!f1) return res;
  auto f2 = try_probe(g2);
  if (!f2) return res;
  const auto resolution = [&] {
    return kBracketResolution * std::max({1.0, std::abs(lo), std::abs(hi)});
  };
  while (hi - lo > resolution()) {
    if (*f1 >= *f2) {
      hi = g2;
      g2 = g1;
      f2 = f1;
      g1 = hi - kGoldenRatio * (hi - lo);
      f1 = try_probe(g1);
      if (!f1) break;
    } else {
      lo = g1;
      g1 = g2;
      f1 = f2;
      g2 = lo + kGoldenRatio * (hi - lo);
      f2 = try_probe(g2);
      if (!f2) break;
    }
  }
  return res;
}

struct BudgetPolicy {
  std::array<int, 3> per_direction{3, 3, 3};
  double slope_threshold = 0.02;  // score improvement per fresh evaluation
  double multiplier = 2.0;
  int total = 50;
};

inline void validate(const BudgetPolicy& p) {
  for (int c : p.per_direction)
    if (c < 1) throw InvalidConfig("per-direction budgets must be >= 1");
  if (!(p.slope_threshold > 0.0))
    throw InvalidConfig("slope threshold must be positive");
  if (!(p.multiplier > 1.0))
    throw InvalidConfig("budget multiplier must exceed 1");
  if (p.total < 0) throw InvalidConfig("total budget must be nonnegative");
}

// Emitted after each line search when a trace hook is installed. The
// (gamma_low, gamma_best, gamma_high) triple is the classic bracket view of
// the finished search.
struct LineSearchLog {
  int direction_row = 0;
  int budget_cap = 0;
  int fresh_used = 0;
  double best_before = 0.0;
  double best_after = 0.0;
  int direction_budget_after = 0;
  double gamma_low = 0.0;
  double gamma_best = 0.0;
  double gamma_high = 0.0;
};

struct CdSettings {
  HyperConfig start;
  ReparamMatrix directions = preset_matrix("balance");
  BudgetPolicy budget{};
  SearchSpace space = default_space_2d();
  bool reverse_directions = false;
  std::function<void(const LineSearchLog&)> trace;
};

namespace detail {

// A row is searchable when it moves some active dimension and leaves every
// pinned dimension alone.
inline std::vector<int> usable_rows(const ReparamMatrix& m,
                                    const SearchSpace& space, bool reversed) {
  std::vector<int> rows;
  for (int r = 0; r < 3; ++r) {
    bool moves_active = false, moves_pinned = false;
    for (int d = 0; d < 3; ++d) {
      if (m.rows[size_t(r)][size_t(d)] == 0.0) continue;
      (space.active(d) ? moves_active : moves_pinned) = true;
    }
    if (moves_active && !moves_pinned) rows.push_back(r);
  }
  if (reversed) std::reverse(rows.begin(), rows.end());
  return rows;
}

}  // namespace detail

// Coordinate descent: cycle the usable direction rows, anchor every line
// search at the incumbent, and grow a direction's budget whenever its last
// line search improved the incumbent by less than the slope threshold per
// fresh evaluation. The starting point is evaluated once, up front, as the
// first budgeted trial.
inline TrialHistory coordinate_descent(const Objective& objective,
                                       const CdSettings& settings) {
  validate(settings.space);
  validate(settings.budget);
  if (!contains(settings.space, settings.start))
    throw InvalidStart("starting configuration lies outside the search space");
  if (std::abs(settings.directions.determinant()) <= kSingularDetTol)
    throw SingularMatrix("direction matrix is not invertible");
  const auto order = detail::usable_rows(settings.directions, settings.space,
                                         settings.reverse_directions);
  if (order.empty())
    throw InvalidConfig(
        "no direction row moves the active dimensions of the space");

  Evaluator eval(objective);
  HyperConfig incumbent = settings.start;
  double incumbent_score = eval.evaluate(incumbent).score;

  auto budgets = settings.budget.per_direction;
  const int total = settings.budget.total;
  size_t position = 0;
  int fresh_at_cycle_start = eval.fresh_count();
  while (eval.fresh_count() < total) {
    if (position % order.size() == 0 && position != 0) {
      // A full cycle without a single fresh evaluation means every line is
      // exhausted down to the bracket resolution.
      if (eval.fresh_count() == fresh_at_cycle_start) break;
      fresh_at_cycle_start = eval.fresh_count();
    }
    const int row = order[position % order.size()];
    const int cap =
        std::min(budgets[size_t(row)], total - eval.fresh_count());
    const double before = incumbent_score;
    const auto res = line_search(eval, incumbent, incumbent_score,
                                 settings.directions.row(row), cap,
                                 settings.space);
    if (res.best_score > incumbent_score) {
      incumbent = res.best;
      incumbent_score = res.best_score;
    }
    if (res.fresh_used > 0) {
      const double slope =
          (incumbent_score - before) / static_cast<double>(res.fresh_used);
      if (slope < settings.budget.slope_threshold)
        budgets[size_t(row)] = static_cast<int>(
            std::ceil(budgets[size_t(row)] * settings.budget.multiplier));
    }
    if (settings.trace)
      settings.trace({row, cap, res.fresh_used, before, incumbent_score,
                      budgets[size_t(row)], res.bracket.lo, res.best_gamma,
                      res.bracket.hi});
    ++position;
  }
  return eval.take_history();
}

// Baseline: independent log-uniform draws over the active dimensions.
inline TrialHistory random_search(const Objective& objective,
                                  const SearchSpace& space, int budget,
                                  std::uint64_t seed) {
  validate(space);
  if (budget < 1) throw InsufficientBudget("random search needs budget >= 1");
  Evaluator eval(objective);
  std::mt19937_64 rng(seed);
  if (space.active_count() == 0) {
    // Fully pinned space: there is only one configuration to try.
    eval.evaluate(sample_log_uniform(space, rng));
    return eval.take_history();
  }
  while (eval.fresh_count() < budget)
    eval.evaluate(sample_log_uniform(space, rng));
  return eval.take_history();
}

}  // namespace balopt
