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
// Analytic stand-in objectives: a concave quadratic in chosen log-space
// directions, optionally roughened by a smooth seeded sinusoidal field.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "balopt/errors.hpp"
#include "balopt/reparam.hpp"
#include "balopt/text.hpp"

namespace balopt {

struct SyntheticLandscape {
  HyperConfig optimum{8e-3, 2.0, 64.0};
  double peak_score = 0.85;
  // Rows are unit directions in log-h space; the quadratic is separable in
  // the coordinates v = directions * log h.
  ReparamMatrix directions = preset_matrix("balance");
  std::array<double, 3> curvatures{2.0, 0.1, 0.05};
  double perturb_amplitude = 0.0;
  std::uint64_t perturb_seed = 0;
};

namespace detail {

inline ReparamMatrix normalize_rows(const ReparamMatrix& m) {
  ReparamMatrix out = m;
  for (auto& row : out.rows) {
    const double norm =
        std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw InvalidConfig("direction rows must be nonzero");
    for (double& v : row) v /= norm;
  }
  return out;
}

// Smooth bounded field: mean of three sinusoids with seeded frequencies and
// phases, evaluated on log h.
struct PerturbField {
  std::array<std::array<double, 3>, 3> freq{};
  std::array<double, 3> phase{};

  explicit PerturbField(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (auto& f : freq)
      for (double& v : f) v = 0.6 + 1.8 * unit_double(rng);
    for (double& p : phase) p = 6.283185307179586 * unit_double(rng);
  }

  double operator()(const std::array<double, 3>& log_h) const {
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const auto& f = freq[size_t(k)];
      sum += std::sin(f[0] * log_h[0] + f[1] * log_h[1] + f[2] * log_h[2] +
                      phase[size_t(k)]);
    }
    return sum / 3.0;
  }
};

}  // namespace detail

// Normalizes the direction rows and checks the remaining invariants.
inline SyntheticLandscape make_landscape(SyntheticLandscape s) {
  validate(s.optimum);
  if (!std::isfinite(s.peak_score))
    throw InvalidConfig("peak score must be finite");
  for (double d : s.curvatures)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw InvalidConfig("curvatures must be nonnegative");
  if (!(s.perturb_amplitude >= 0.0) || !std::isfinite(s.perturb_amplitude))
    throw InvalidConfig("perturbation amplitude must be nonnegative");
  s.directions = detail::normalize_rows(s.directions);
  if (std::abs(s.directions.determinant()) <= kSingularDetTol)
    throw InvalidConfig("direction matrix is not invertible");
  return s;
}

inline double synthetic_eval(const SyntheticLandscape& s,
                             const HyperConfig& h) {
  const auto v = s.directions.apply(log_array(h));
  const auto v_star = s.directions.apply(log_array(s.optimum));
  double score = s.peak_score;
  for (int i = 0; i < 3; ++i) {
    const double delta = v[size_t(i)] - v_star[size_t(i)];
    score -= s.curvatures[size_t(i)] * delta * delta;
  }
  if (s.perturb_amplitude > 0.0)
    score += s.perturb_amplitude *
             detail::PerturbField(s.perturb_seed)(log_array(h));
  return score;
}

// Named landscapes.
//   ridge: strong curvature across the balance direction, weak along joint
//          scaling and batch size; mirrors the geometry the balance matrix
//          is built for.
//   bowl:  isotropic quadratic in plain log coordinates.
inline SyntheticLandscape synthetic_preset(std::string_view name) {
  if (name == "ridge") return make_landscape({});
  if (name == "bowl") {
    SyntheticLandscape s;
    s.optimum = {0.1, 0.5, 64.0};
    s.peak_score = 1.0;
    s.directions = preset_matrix("identity");
    s.curvatures = {0.5, 0.5, 0.5};
    return make_landscape(s);
  }
  throw UnknownPreset("no synthetic landscape named '" + std::string(name) +
                      "'");
}

inline SyntheticLandscape parse_landscape_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("landscape JSON: ") + e.what());
  }
  SyntheticLandscape s;
  try {
    if (doc.contains("optimum")) {
      const auto& o = doc["optimum"];
      s.optimum = {o.at(0).get<double>(), o.at(1).get<double>(),
                   o.at(2).get<double>()};
    }
    if (doc.contains("peak")) s.peak_score = doc["peak"].get<double>();
    if (doc.contains("curvatures")) {
      const auto& c = doc["curvatures"];
      for (int i = 0; i < 3; ++i) s.curvatures[size_t(i)] = c.at(size_t(i)).get<double>();
    }
    if (doc.contains("matrix")) {
      const auto& m = doc["matrix"];
      if (m.is_string()) {
        s.directions = preset_matrix(m.get<std::string>());
      } else {
        for (int i = 0; i < 9; ++i)
          s.directions.rows[size_t(i) / 3][size_t(i) % 3] =
              m.at(size_t(i)).get<double>();
      }
    }
    if (doc.contains("perturb_amplitude"))
      s.perturb_amplitude = doc["perturb_amplitude"].get<double>();
    if (doc.contains("perturb_seed"))
      s.perturb_seed = doc["perturb_seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("landscape JSON: ") + e.what());
  }
  return make_landscape(s);
}

inline SyntheticLandscape load_landscape(const std::string& path) {
  return parse_landscape_json(text::read_file(path));
}

}  // namespace balopt
