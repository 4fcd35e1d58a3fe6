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
// Positive/entropy decomposition of pair-based contrastive losses.
//
// Both supported losses are computed from a labeled pairwise-distance matrix:
//   margin:  pos = d^q over same-label pairs, ent = max(0, m-d)^q over
//            different-label pairs, each averaged over its own pair set.
//   infonce: pos = d/tau and ent = log sum_k exp(-d_ik/tau), both averaged
//            over the positive pairs; the contrastive set for (i,j) is {j}
//            plus every index with a different label than i.
// The batch loss is the weighted sum lambda_p * pos + lambda_e * ent; the
// usual global-average and separate-average aggregations are particular
// weight choices.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "balopt/errors.hpp"

namespace balopt {

struct LabeledBatch {
  std::vector<int> labels;
  std::vector<std::vector<double>> distances;
  // Optional pair mask; empty means every off-diagonal pair participates.
  // mask[i][j] == 0 removes the ordered pair (i,j) from the positive,
  // negative, and contrastive sets alike.
  std::vector<std::vector<std::uint8_t>> mask;

  int size() const { return static_cast<int>(labels.size()); }
  bool pair_allowed(int i, int j) const {
    return mask.empty() || mask[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0;
  }
};

inline constexpr double kSymmetryTol = 1e-9;

inline void validate(const LabeledBatch& batch) {
  const size_t b = batch.labels.size();
  if (b < 2) throw InvalidBatch("batch needs at least two elements");
  if (batch.distances.size() != b)
    throw InvalidBatch("distance matrix row count does not match labels");
  for (size_t i = 0; i < b; ++i) {
    if (batch.distances[i].size() != b)
      throw InvalidBatch("distance matrix is not square");
    for (size_t j = 0; j < b; ++j) {
      const double d = batch.distances[i][j];
      if (!std::isfinite(d) || d < 0.0)
        throw InvalidBatch("distances must be finite and nonnegative");
      if (std::abs(d - batch.distances[j][i]) > kSymmetryTol)
        throw InvalidBatch("distance matrix is not symmetric");
    }
    if (batch.distances[i][i] != 0.0)
      throw InvalidBatch("distance matrix diagonal must be zero");
  }
  if (!batch.mask.empty()) {
    if (batch.mask.size() != b)
      throw InvalidBatch("mask row count does not match labels");
    for (const auto& row : batch.mask)
      if (row.size() != b) throw InvalidBatch("mask is not square");
  }
}

struct MarginParams {
  double margin = 0.5;
  int exponent = 1;  // q in {1, 2}
};

inline void validate(const MarginParams& p) {
  if (!(p.margin > 0.0) || !std::isfinite(p.margin))
    throw InvalidConfig("margin must be finite and positive");
  if (p.exponent != 1 && p.exponent != 2)
    throw InvalidConfig("margin exponent must be 1 or 2");
}

struct InfoNceParams {
  double temperature = 0.1;
};

inline void validate(const InfoNceParams& p) {
  if (!(p.temperature > 0.0) || !std::isfinite(p.temperature))
    throw InvalidConfig("temperature must be finite and positive");
}

struct BalanceCoeffs {
  double lambda_p = 1.0;
  double lambda_e = 1.0;
};

inline void validate(const BalanceCoeffs& c) {
  if (c.lambda_p < 0.0 || c.lambda_e < 0.0 || !std::isfinite(c.lambda_p) ||
      !std::isfinite(c.lambda_e))
    throw InvalidConfig("balance coefficients must be finite and nonnegative");
  if (c.lambda_p == 0.0 && c.lambda_e == 0.0)
    throw InvalidConfig("balance coefficients cannot both be zero");
}

struct TermPair {
  double pos_term = 0.0;
  double ent_term = 0.0;
};

using IndexPair = std::pair<int, int>;

struct PairPartition {
  std::vector<IndexPair> positives;  // ordered (i,j), y_i == y_j, i != j
  std::vector<IndexPair> negatives;  // ordered (i,j), y_i != y_j
};

inline PairPartition partition_pairs(
    const std::vector<int>& labels,
    const std::vector<std::vector<std::uint8_t>>& mask = {}) {
  const int b = static_cast<int>(labels.size());
  if (b < 2) throw InvalidBatch("batch needs at least two elements");
  PairPartition part;
  const auto allowed = [&](int i, int j) {
    return mask.empty() ||
           mask[static_cast<size_t>(i)][static_cast<size_t>(j)] != 0;
  };
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      if (i == j || !allowed(i, j)) continue;
      auto& side = labels[static_cast<size_t>(i)] ==
                           labels[static_cast<size_t>(j)]
                       ? part.positives
                       : part.negatives;
      side.emplace_back(i, j);
    }
  if (part.positives.empty())
    throw DegenerateBatch("positive pair set is empty");
  if (part.negatives.empty())
    throw DegenerateBatch("negative pair set is empty");
  return part;
}

// Mean of d^q over same-label pairs and of max(0, m-d)^q over
// different-label pairs.
inline TermPair margin_terms(const LabeledBatch& batch, const MarginParams& p) {
  validate(batch);
  validate(p);
  const auto part = partition_pairs(batch.labels, batch.mask);
  const auto powq = [&](double v) { return p.exponent == 1 ? v : v * v; };
  double pos = 0.0;
  for (const auto& [i, j] : part.positives)
    pos += powq(batch.distances[static_cast<size_t>(i)][static_cast<size_t>(j)]);
  double ent = 0.0;
  for (const auto& [i, j] : part.negatives)
    ent += powq(std::max(
        0.0, p.margin -
                 batch.distances[static_cast<size_t>(i)][static_cast<size_t>(j)]));
  return {pos / static_cast<double>(part.positives.size()),
          ent / static_cast<double>(part.negatives.size())};
}

// Both terms averaged over the positive pairs; the entropy term is a
// log-sum-exp over the contrastive set, computed with max subtraction.
inline TermPair infonce_terms(const LabeledBatch& batch,
                              const InfoNceParams& p) {
  validate(batch);
  validate(p);
  const auto part = partition_pairs(batch.labels, batch.mask);
  const auto d = [&](int i, int k) {
    return batch.distances[static_cast<size_t>(i)][static_cast<size_t>(k)];
  };
  const int b = batch.size();
  double pos = 0.0, ent = 0.0;
  std::vector<double> exponents;
  exponents.reserve(static_cast<size_t>(b));
  for (const auto& [i, j] : part.positives) {
    pos += d(i, j) / p.temperature;
    exponents.clear();
    exponents.push_back(-d(i, j) / p.temperature);
    for (int k = 0; k < b; ++k)
      if (batch.labels[static_cast<size_t>(k)] !=
              batch.labels[static_cast<size_t>(i)] &&
          batch.pair_allowed(i, k))
        exponents.push_back(-d(i, k) / p.temperature);
    const double peak = *std::max_element(exponents.begin(), exponents.end());
    double sum = 0.0;
    for (double e : exponents) sum += std::exp(e - peak);
    ent += peak + std::log(sum);
  }
  const double n = static_cast<double>(part.positives.size());
  return {pos / n, ent / n};
}

inline double combine(const TermPair& t, const BalanceCoeffs& c) {
  validate(c);
  return c.lambda_p * t.pos_term + c.lambda_e * t.ent_term;
}

// Weights that make the combined margin loss equal the plain mean over all
// ordered off-diagonal pairs, given the actual pair counts.
inline BalanceCoeffs global_average_coeffs(size_t positive_count,
                                           size_t negative_count) {
  if (positive_count == 0 || negative_count == 0)
    throw DegenerateBatch(positive_count == 0 ? "positive pair set is empty"
                                              : "negative pair set is empty");
  const double total = static_cast<double>(positive_count + negative_count);
  return {static_cast<double>(positive_count) / total,
          static_cast<double>(negative_count) / total};
}

// 2-per-class special case: |P| = b and |E| = b^2 - 2b, so the weights reduce
// to lambda_p = 1/(b-1), lambda_e = 1 - 1/(b-1).
inline BalanceCoeffs global_average_coeffs(int batch_size) {
  if (batch_size < 3)
    throw DegenerateBatch(
        "global average needs batch size >= 3 under 2-per-class sampling");
  const double b = static_cast<double>(batch_size);
  return {1.0 / (b - 1.0), 1.0 - 1.0 / (b - 1.0)};
}

inline BalanceCoeffs separate_average_coeffs() { return {1.0, 1.0}; }

}  // namespace balopt
