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
// Dense performance grids over (lambda_p, lambda_e, batch_size) and their
// multilinear interpolation in log coordinates. Grids are stored as CSV with
// header "lambda_p,lambda_e,batch_size,score", one node per row, rows in any
// order, rectangular coverage required.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "balopt/errors.hpp"
#include "balopt/reparam.hpp"
#include "balopt/text.hpp"

namespace balopt {

struct PerformanceGrid {
  std::array<std::vector<double>, 3> axes;  // strictly increasing, positive
  std::vector<double> scores;               // dense, C-order over the axes
  std::string metric_name;
  std::string dataset_tag;

  size_t flat_index(size_t i, size_t j, size_t k) const {
    return (i * axes[1].size() + j) * axes[2].size() + k;
  }
  double at(size_t i, size_t j, size_t k) const {
    return scores[flat_index(i, j, k)];
  }
  double& at(size_t i, size_t j, size_t k) {
    return scores[flat_index(i, j, k)];
  }

  // Axis-aligned hull, usable directly as a search space.
  SearchSpace bounding_space() const {
    SearchSpace s;
    for (int d = 0; d < 3; ++d)
      s.dims[size_t(d)] = {axes[size_t(d)].front(), axes[size_t(d)].back()};
    return s;
  }
};

inline void validate(const PerformanceGrid& g) {
  size_t expected = 1;
  for (int d = 0; d < 3; ++d) {
    const auto& axis = g.axes[size_t(d)];
    if (axis.empty())
      throw InvalidConfig("grid axis " + std::string(kDimNames[size_t(d)]) +
                          " is empty");
    for (size_t i = 0; i < axis.size(); ++i) {
      if (!(axis[i] > 0.0) || !std::isfinite(axis[i]))
        throw InvalidConfig("grid axis values must be positive and finite");
      if (i > 0 && !(axis[i] > axis[i - 1]))
        throw InvalidConfig("grid axis " + std::string(kDimNames[size_t(d)]) +
                            " must be strictly increasing");
    }
    expected *= axis.size();
  }
  if (g.scores.size() != expected)
    throw InvalidConfig("grid score tensor does not match axis lengths");
  for (double s : g.scores)
    if (!std::isfinite(s)) throw InvalidConfig("grid scores must be finite");
}

namespace detail {

struct AxisWeight {
  size_t lo_index = 0;
  size_t hi_index = 0;
  double hi_weight = 0.0;  // 0 at the lower node, 1 at the upper node
};

// Relative slack applied at the hull; probes that land on a bound after an
// exp/log round-trip stay inside.
inline constexpr double kHullTol = 1e-9;

inline AxisWeight locate(const std::vector<double>& axis, double value,
                         std::string_view name) {
  const double x = std::log(value);
  const double lo = std::log(axis.front());
  const double hi = std::log(axis.back());
  const double slack = kHullTol * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (x < lo - slack || x > hi + slack)
    throw OutOfDomain(std::string(name) + "=" + text::format_double(value) +
                      " is outside the grid hull [" +
                      text::format_double(axis.front()) + ", " +
                      text::format_double(axis.back()) + "]");
  if (axis.size() == 1) return {0, 0, 0.0};
  const double clamped = std::min(std::max(x, lo), hi);
  // Segment search in log space, so a query at a node reproduces the node's
  // score bit-exactly (t becomes exactly 0 or 1).
  size_t hi_idx = 1;
  while (hi_idx < axis.size() - 1 && std::log(axis[hi_idx]) < clamped)
    ++hi_idx;
  const size_t lo_idx = hi_idx - 1;
  const double x0 = std::log(axis[lo_idx]), x1 = std::log(axis[hi_idx]);
  double t = (clamped - x0) / (x1 - x0);
  t = std::min(std::max(t, 0.0), 1.0);
  return {lo_idx, hi_idx, t};
}

}  // namespace detail

// Multilinear interpolation with weights computed in log coordinates; exact
// at the nodes, no extrapolation outside the hull.
inline double grid_interpolate(const PerformanceGrid& g, const HyperConfig& h) {
  validate(h);
  const auto a = h.as_array();
  std::array<detail::AxisWeight, 3> w;
  for (int d = 0; d < 3; ++d)
    w[size_t(d)] =
        detail::locate(g.axes[size_t(d)], a[size_t(d)], kDimNames[size_t(d)]);
  double result = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double weight = 1.0;
    std::array<size_t, 3> idx{};
    for (int d = 0; d < 3; ++d) {
      const bool upper = (corner >> d) & 1;
      weight *= upper ? w[size_t(d)].hi_weight : 1.0 - w[size_t(d)].hi_weight;
      idx[size_t(d)] = upper ? w[size_t(d)].hi_index : w[size_t(d)].lo_index;
    }
    if (weight != 0.0) result += weight * g.at(idx[0], idx[1], idx[2]);
  }
  return result;
}

inline constexpr std::string_view kGridCsvHeader =
    "lambda_p,lambda_e,batch_size,score";

inline std::string grid_to_csv(const PerformanceGrid& g) {
  validate(g);
  std::string out;
  if (!g.metric_name.empty()) out += "# metric: " + g.metric_name + "\n";
  if (!g.dataset_tag.empty()) out += "# dataset: " + g.dataset_tag + "\n";
  out += std::string(kGridCsvHeader) + "\n";
  for (size_t i = 0; i < g.axes[0].size(); ++i)
    for (size_t j = 0; j < g.axes[1].size(); ++j)
      for (size_t k = 0; k < g.axes[2].size(); ++k) {
        out += text::format_double(g.axes[0][i]) + ",";
        out += text::format_double(g.axes[1][j]) + ",";
        out += text::format_double(g.axes[2][k]) + ",";
        out += text::format_double(g.at(i, j, k)) + "\n";
      }
  return out;
}

inline void grid_save(const PerformanceGrid& g, const std::string& path) {
  text::write_file(path, grid_to_csv(g));
}

inline PerformanceGrid parse_grid_csv(std::string_view content) {
  struct Node {
    std::array<double, 3> coord;
    double score;
    int row;
  };
  std::vector<Node> nodes;
  std::string metric_name, dataset_tag;
  bool header_seen = false;
  int row = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++row;
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = text::trim(line.substr(1));
      if (body.rfind("metric:", 0) == 0)
        metric_name = text::trim(body.substr(7));
      else if (body.rfind("dataset:", 0) == 0)
        dataset_tag = text::trim(body.substr(8));
      continue;
    }
    if (!header_seen) {
      auto cells = text::split(line, ',');
      for (auto& c : cells) c = std::string(text::trim(c));
      if (cells.size() != 4 || cells[0] != "lambda_p" ||
          cells[1] != "lambda_e" || cells[2] != "batch_size" ||
          cells[3] != "score")
        throw FormatError("row " + std::to_string(row) + ": expected header '" +
                          std::string(kGridCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto cells = text::split(line, ',');
    if (cells.size() != 4)
      throw FormatError("row " + std::to_string(row) + ": expected 4 columns");
    Node n{};
    n.row = row;
    try {
      for (int d = 0; d < 3; ++d) n.coord[size_t(d)] = text::parse_double(cells[size_t(d)]);
      n.score = text::parse_double(cells[3]);
    } catch (const FormatError& e) {
      throw FormatError("row " + std::to_string(row) + ": " + e.what());
    }
    for (int d = 0; d < 3; ++d)
      if (!(n.coord[size_t(d)] > 0.0) || !std::isfinite(n.coord[size_t(d)]))
        throw FormatError("row " + std::to_string(row) + ": " +
                          std::string(kDimNames[size_t(d)]) +
                          " must be positive");
    if (!std::isfinite(n.score))
      throw FormatError("row " + std::to_string(row) + ": score must be finite");
    nodes.push_back(n);
  }
  if (!header_seen) throw FormatError("missing grid CSV header");
  if (nodes.empty()) throw FormatError("grid has no data rows");

  PerformanceGrid g;
  g.metric_name = metric_name;
  g.dataset_tag = dataset_tag;
  for (int d = 0; d < 3; ++d) {
    auto& axis = g.axes[size_t(d)];
    for (const auto& n : nodes) axis.push_back(n.coord[size_t(d)]);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  const size_t total = g.axes[0].size() * g.axes[1].size() * g.axes[2].size();
  const double unset = std::numeric_limits<double>::quiet_NaN();
  g.scores.assign(total, unset);
  const auto axis_index = [](const std::vector<double>& axis, double v) {
    return size_t(std::distance(
        axis.begin(), std::lower_bound(axis.begin(), axis.end(), v)));
  };
  for (const auto& n : nodes) {
    const size_t i = axis_index(g.axes[0], n.coord[0]);
    const size_t j = axis_index(g.axes[1], n.coord[1]);
    const size_t k = axis_index(g.axes[2], n.coord[2]);
    double& slot = g.at(i, j, k);
    if (!std::isnan(slot))
      throw FormatError("row " + std::to_string(n.row) +
                        ": duplicate grid node");
    slot = n.score;
  }
  if (nodes.size() != total)
    throw FormatError(
        "grid coverage is not rectangular: " + std::to_string(nodes.size()) +
        " rows for " + std::to_string(g.axes[0].size()) + "x" +
        std::to_string(g.axes[1].size()) + "x" +
        std::to_string(g.axes[2].size()) + " = " + std::to_string(total) +
        " nodes");
  validate(g);
  return g;
}

inline PerformanceGrid grid_load(const std::string& path) {
  return parse_grid_csv(text::read_file(path));
}

}  // namespace balopt
