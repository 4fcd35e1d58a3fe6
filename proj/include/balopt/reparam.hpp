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
// Hyperparameter search space and its log-space reparameterization.
//
// A configuration h = (lambda_p_rate, lambda_e_rate, batch_size) lives in the
// strictly positive orthant. Line searches operate in coordinates
// r = A * log(h), where the rows of the 3x3 matrix A are search directions in
// log space. Three presets are provided: "balance" (balance direction, joint
// scale direction, batch-size direction), "identity" (no reparameterization),
// and "theory" (directions derived from per-term learning-rate/batch-size
// scaling constraints).

#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

#include <json.hpp>

#include "balopt/errors.hpp"
#include "balopt/text.hpp"

namespace balopt {

// Dimension order used everywhere: effective positive-term rate, effective
// entropy-term rate, batch size.
inline constexpr std::array<std::string_view, 3> kDimNames = {
    "lambda_p", "lambda_e", "batch_size"};

struct HyperConfig {
  double lambda_p_rate = 1.0;
  double lambda_e_rate = 1.0;
  double batch_size = 64.0;

  std::array<double, 3> as_array() const {
    return {lambda_p_rate, lambda_e_rate, batch_size};
  }
  static HyperConfig from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }
};

inline bool is_valid(const HyperConfig& h) {
  for (double v : h.as_array())
    if (!std::isfinite(v) || v <= 0.0) return false;
  return true;
}

inline void validate(const HyperConfig& h) {
  if (!is_valid(h))
    throw InvalidConfig("hyperparameters must be finite and strictly positive,"
                        " got (" + text::format_double(h.lambda_p_rate) + ", " +
                        text::format_double(h.lambda_e_rate) + ", " +
                        text::format_double(h.batch_size) + ")");
}

inline std::array<double, 3> log_array(const HyperConfig& h) {
  validate(h);
  const auto a = h.as_array();
  return {std::log(a[0]), std::log(a[1]), std::log(a[2])};
}

inline HyperConfig exp_config(const std::array<double, 3>& log_h) {
  return {std::exp(log_h[0]), std::exp(log_h[1]), std::exp(log_h[2])};
}

// ---------------------------------------------------------------------------
// Reparameterization matrix

inline constexpr double kSingularDetTol = 1e-9;

using ReparamPoint = std::array<double, 3>;

struct ReparamMatrix {
  // rows[i] is the i-th search direction in log-h space.
  std::array<std::array<double, 3>, 3> rows{};

  const std::array<double, 3>& row(int i) const { return rows[i]; }

  double determinant() const {
    const auto& m = rows;
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }

  std::array<double, 3> apply(const std::array<double, 3>& v) const {
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i)
      out[i] = rows[i][0] * v[0] + rows[i][1] * v[1] + rows[i][2] * v[2];
    return out;
  }

  // Closed-form adjugate inverse; conditioning is a non-issue at 3x3.
  ReparamMatrix inverse() const {
    const double det = determinant();
    if (!std::isfinite(det) || std::abs(det) <= kSingularDetTol)
      throw SingularMatrix("matrix determinant " + text::format_double(det) +
                           " below invertibility tolerance");
    const auto& m = rows;
    ReparamMatrix inv;
    inv.rows[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv.rows[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv.rows[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv.rows[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv.rows[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv.rows[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv.rows[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv.rows[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv.rows[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv;
  }
};

// Named direction presets.
//   balance:  rows are the balance direction (-1,1,0), the joint scale
//             direction (1,1,0), and the batch-size axis (0,0,1).
//   identity: plain log-axis coordinate descent.
//   theory:   rows from the per-term scaling constraint system
//             (1,0,-1), (0,1,-2), (1,-1,0).
inline ReparamMatrix preset_matrix(std::string_view name) {
  if (name == "balance")
    return {{{{-1, 1, 0}, {1, 1, 0}, {0, 0, 1}}}};
  if (name == "identity")
    return {{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
  if (name == "theory")
    return {{{{1, 0, -1}, {0, 1, -2}, {1, -1, 0}}}};
  throw UnknownPreset("no direction-matrix preset named '" +
                      std::string(name) + "'");
}

// Accepts a preset name or nine comma-separated numbers in row-major order.
inline ReparamMatrix parse_matrix(std::string_view spec) {
  if (spec.find(',') == std::string_view::npos) return preset_matrix(spec);
  const auto parts = text::split(spec, ',');
  if (parts.size() != 9)
    throw FormatError("matrix spec needs 9 numbers, got " +
                      std::to_string(parts.size()));
  ReparamMatrix m;
  for (int i = 0; i < 9; ++i)
    m.rows[i / 3][i % 3] = text::parse_double(parts[static_cast<size_t>(i)]);
  return m;
}

// r = A * log h
inline ReparamPoint to_reparam(const HyperConfig& h, const ReparamMatrix& a) {
  if (std::abs(a.determinant()) <= kSingularDetTol)
    throw SingularMatrix("reparameterization matrix is not invertible");
  const auto r = a.apply(log_array(h));
  for (double v : r)
    if (!std::isfinite(v))
      throw InvalidConfig("reparameterized coordinates overflow");
  return r;
}

// h = exp(A^-1 r)
inline HyperConfig from_reparam(const ReparamPoint& r, const ReparamMatrix& a) {
  const auto log_h = a.inverse().apply(r);
  const HyperConfig h = exp_config(log_h);
  validate(h);
  return h;
}

// ---------------------------------------------------------------------------
// Search space

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchSpace {
  // Closed per-dimension intervals, kDimNames order. A pinned dimension has
  // lo == hi and is excluded from the search.
  std::array<Interval, 3> dims{};

  bool active(int i) const { return dims[i].lo < dims[i].hi; }
  int active_count() const {
    return static_cast<int>(active(0)) + static_cast<int>(active(1)) +
           static_cast<int>(active(2));
  }
};

inline void validate(const SearchSpace& s) {
  for (int i = 0; i < 3; ++i) {
    const auto& d = s.dims[i];
    if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || d.lo <= 0.0 ||
        d.lo > d.hi)
      throw InvalidConfig("search range for " + std::string(kDimNames[i]) +
                          " must satisfy 0 < lo <= hi, got [" +
                          text::format_double(d.lo) + ", " +
                          text::format_double(d.hi) + "]");
  }
}

inline bool contains(const SearchSpace& s, const HyperConfig& h) {
  const auto a = h.as_array();
  for (int i = 0; i < 3; ++i)
    if (!(s.dims[i].lo <= a[i] && a[i] <= s.dims[i].hi)) return false;
  return true;
}

inline HyperConfig clamp(const SearchSpace& s, const HyperConfig& h) {
  auto a = h.as_array();
  for (int i = 0; i < 3; ++i)
    a[i] = std::min(std::max(a[i], s.dims[i].lo), s.dims[i].hi);
  return HyperConfig::from_array(a);
}

inline HyperConfig log_center(const SearchSpace& s) {
  std::array<double, 3> a{};
  for (int i = 0; i < 3; ++i) {
    if (s.dims[i].lo == s.dims[i].hi) {
      a[i] = s.dims[i].lo;
      continue;
    }
    const double mid =
        std::exp(0.5 * (std::log(s.dims[i].lo) + std::log(s.dims[i].hi)));
    a[i] = std::min(std::max(mid, s.dims[i].lo), s.dims[i].hi);
  }
  return HyperConfig::from_array(a);
}

namespace detail {

// Portable unit draw in [0,1); keeps sampled trajectories stable across
// standard-library implementations.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Independent log-uniform draw per active dimension; pinned dimensions stay
// at their pinned value.
inline HyperConfig sample_log_uniform(const SearchSpace& s,
                                      std::mt19937_64& rng) {
  std::array<double, 3> a{};
  for (int i = 0; i < 3; ++i) {
    if (!s.active(i)) {
      a[i] = s.dims[i].lo;
      continue;
    }
    const double lo = std::log(s.dims[i].lo), hi = std::log(s.dims[i].hi);
    a[i] = std::exp(lo + detail::unit_double(rng) * (hi - lo));
  }
  return HyperConfig::from_array(a);
}

// Default tuning ranges: rates in [1e-6, 17], batch size in [16, 512].
inline SearchSpace default_space_3d() {
  return {{{{1e-6, 17.0}, {1e-6, 17.0}, {16.0, 512.0}}}};
}

// 2D variant with the batch size pinned.
inline SearchSpace default_space_2d(double pinned_batch = 64.0) {
  return {{{{1e-6, 17.0}, {1e-6, 17.0}, {pinned_batch, pinned_batch}}}};
}

namespace detail {

inline Interval interval_from_json(const nlohmann::json& v,
                                   const std::string& key) {
  if (v.is_number()) {
    const double x = v.get<double>();
    return {x, x};
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw FormatError("search-space field '" + key +
                    "' must be a number or [lo, hi]");
}

inline int dim_index(std::string_view key) {
  for (int i = 0; i < 3; ++i)
    if (key == kDimNames[i]) return i;
  throw FormatError("unknown search-space key '" + std::string(key) + "'");
}

}  // namespace detail

// Parses either a JSON object {"lambda_p": [lo,hi], "lambda_e": [lo,hi],
// "batch_size": 64} or key=value lines ("lambda_p = 1e-6, 17"). A single
// number pins the dimension. '#' starts a comment in the key=value form.
inline SearchSpace parse_search_space(std::string_view content) {
  SearchSpace space;
  std::array<bool, 3> seen{false, false, false};
  const auto body = text::trim(content);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("search-space JSON: ") + e.what());
    }
    for (const auto& [key, value] : doc.items()) {
      const int i = detail::dim_index(key);
      space.dims[i] = detail::interval_from_json(value, key);
      seen[i] = true;
    }
  } else {
    for (const auto& raw : text::split_lines(body)) {
      auto line = std::string(text::trim(raw));
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.resize(hash);
      if (text::trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw FormatError("expected key=value, got '" + line + "'");
      const int i = detail::dim_index(text::trim(line.substr(0, eq)));
      const auto values = text::split(line.substr(eq + 1), ',');
      if (values.size() == 1) {
        const double x = text::parse_double(values[0]);
        space.dims[i] = {x, x};
      } else if (values.size() == 2) {
        space.dims[i] = {text::parse_double(values[0]),
                         text::parse_double(values[1])};
      } else {
        throw FormatError("dimension '" + std::string(kDimNames[i]) +
                          "' needs one or two values");
      }
      seen[i] = true;
    }
  }
  for (int i = 0; i < 3; ++i)
    if (!seen[i])
      throw FormatError("search space is missing dimension '" +
                        std::string(kDimNames[i]) + "'");
  validate(space);
  return space;
}

inline SearchSpace load_search_space(const std::string& path) {
  return parse_search_space(text::read_file(path));
}

}  // namespace balopt
