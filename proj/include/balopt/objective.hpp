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
// The objective abstraction tuned by the search engine: a deterministic
// scalar performance measure over configurations, higher is better.

#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "balopt/errors.hpp"
#include "balopt/external.hpp"
#include "balopt/grid.hpp"
#include "balopt/reparam.hpp"
#include "balopt/synthetic.hpp"

namespace balopt {

class Objective {
 public:
  virtual ~Objective() = default;
  // Throws (OutOfDomain, CommandFailed, ...) on failure; the engine treats a
  // failed probe as score -inf.
  virtual double evaluate(const HyperConfig& h) const = 0;
  virtual std::string describe() const = 0;
};

class GridObjective final : public Objective {
 public:
  explicit GridObjective(PerformanceGrid grid) : grid_(std::move(grid)) {
    validate(grid_);
  }
  double evaluate(const HyperConfig& h) const override {
    return grid_interpolate(grid_, h);
  }
  std::string describe() const override {
    return "grid(" + std::to_string(grid_.axes[0].size()) + "x" +
           std::to_string(grid_.axes[1].size()) + "x" +
           std::to_string(grid_.axes[2].size()) + ")";
  }
  const PerformanceGrid& grid() const { return grid_; }

 private:
  PerformanceGrid grid_;
};

class SyntheticObjective final : public Objective {
 public:
  explicit SyntheticObjective(SyntheticLandscape landscape)
      : landscape_(make_landscape(std::move(landscape))) {}
  double evaluate(const HyperConfig& h) const override {
    return synthetic_eval(landscape_, h);
  }
  std::string describe() const override { return "synthetic"; }
  const SyntheticLandscape& landscape() const { return landscape_; }

 private:
  SyntheticLandscape landscape_;
};

// Runs one command per evaluation. Executions are serialized unless the
// caller opts into parallel spawning.
class ExternalObjective final : public Objective {
 public:
  explicit ExternalObjective(ExternalCommandSpec spec,
                             bool allow_parallel = false)
      : spec_(std::move(spec)), allow_parallel_(allow_parallel) {
    validate(spec_);
  }
  double evaluate(const HyperConfig& h) const override {
    if (allow_parallel_) return external_eval(spec_, h);
    std::lock_guard<std::mutex> lock(mutex_);
    return external_eval(spec_, h);
  }
  std::string describe() const override { return "cmd(" + spec_.command + ")"; }

 private:
  ExternalCommandSpec spec_;
  bool allow_parallel_;
  mutable std::mutex mutex_;
};

// Arbitrary callable, mostly for tests and embedding.
class FunctionObjective final : public Objective {
 public:
  using Fn = std::function<double(const HyperConfig&)>;
  explicit FunctionObjective(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  double evaluate(const HyperConfig& h) const override { return fn_(h); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct LoadedObjective {
  std::shared_ptr<Objective> objective;
  // Hull of a grid objective; empty for backends without an intrinsic range.
  std::optional<SearchSpace> natural_space;
};

// Resolves an objective reference of the form
//   grid:<csv file> | synthetic:<preset name or json file> | cmd:<template>
inline LoadedObjective load_objective(const std::string& ref,
                                      double cmd_timeout_seconds = 0.0,
                                      bool cmd_allow_parallel = false) {
  const auto colon = ref.find(':');
  if (colon == std::string::npos)
    throw FormatError("objective reference needs a backend prefix "
                      "(grid:, synthetic:, cmd:), got '" + ref + "'");
  const auto kind = ref.substr(0, colon);
  const auto arg = ref.substr(colon + 1);
  if (kind == "grid") {
    auto obj = std::make_shared<GridObjective>(grid_load(arg));
    auto space = obj->grid().bounding_space();
    return {std::move(obj), space};
  }
  if (kind == "synthetic") {
    SyntheticLandscape landscape;
    try {
      landscape = synthetic_preset(arg);
    } catch (const UnknownPreset&) {
      landscape = load_landscape(arg);
    }
    return {std::make_shared<SyntheticObjective>(landscape), std::nullopt};
  }
  if (kind == "cmd") {
    ExternalCommandSpec spec;
    spec.command = arg;
    spec.timeout_seconds = cmd_timeout_seconds;
    return {std::make_shared<ExternalObjective>(spec, cmd_allow_parallel),
            std::nullopt};
  }
  throw FormatError("unknown objective backend '" + kind + "'");
}

}  // namespace balopt
