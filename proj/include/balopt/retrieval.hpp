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
// Average-precision variants over pre-ranked binary relevance lists.
//
// For a query with R relevant candidates in a list ranked by decreasing
// score:
//   average_precision  = (1/R)       * sum_{k=1..M} P(k) rel(k)
//   ap_top_r           = AP of the list truncated to its first R entries
//                        (denominator: relevant entries inside the cut)
//   ap_at_r            = (1/R)       * sum_{k=1..R} P(k) rel(k)
// The mean of ap_top_r over queries is the R-mAP aggregate; the mean of
// ap_at_r is mAP@R.

#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "balopt/errors.hpp"
#include "balopt/text.hpp"

namespace balopt {

// Binary relevance of one query's candidates, best-ranked first.
using RankedRelevance = std::vector<int>;

struct QuerySetResult {
  std::vector<RankedRelevance> queries;
};

inline void validate(const RankedRelevance& rel) {
  if (rel.empty()) throw FormatError("relevance list is empty");
  for (int v : rel)
    if (v != 0 && v != 1)
      throw FormatError("relevance entries must be 0 or 1, got " +
                        std::to_string(v));
}

inline int relevant_count(const RankedRelevance& rel) {
  return std::accumulate(rel.begin(), rel.end(), 0);
}

namespace detail {

// sum over the first `upto` ranks of P(k)*rel(k), plus the number of
// relevant entries seen inside that prefix.
struct PrefixSum {
  double weighted_precision = 0.0;
  int hits = 0;
};

inline PrefixSum precision_prefix(const RankedRelevance& rel, size_t upto) {
  PrefixSum out;
  for (size_t k = 0; k < upto; ++k) {
    if (rel[k] == 0) continue;
    ++out.hits;
    out.weighted_precision +=
        static_cast<double>(out.hits) / static_cast<double>(k + 1);
  }
  return out;
}

}  // namespace detail

inline double average_precision(const RankedRelevance& rel) {
  validate(rel);
  const int r = relevant_count(rel);
  if (r == 0) throw NoRelevantItems("query has no relevant candidates");
  const auto sum = detail::precision_prefix(rel, rel.size());
  return sum.weighted_precision / static_cast<double>(r);
}

// AP restricted to the top-R cut of the list. A cut containing no relevant
// entry scores 0 (nothing retrieved early, nothing to normalize by).
inline double ap_top_r(const RankedRelevance& rel) {
  validate(rel);
  const int r = relevant_count(rel);
  if (r == 0) throw NoRelevantItems("query has no relevant candidates");
  const auto cut = std::min(rel.size(), static_cast<size_t>(r));
  const auto sum = detail::precision_prefix(rel, cut);
  if (sum.hits == 0) return 0.0;
  return sum.weighted_precision / static_cast<double>(sum.hits);
}

// Same truncated sum, but normalized by the full relevant count R.
inline double ap_at_r(const RankedRelevance& rel) {
  validate(rel);
  const int r = relevant_count(rel);
  if (r == 0) throw NoRelevantItems("query has no relevant candidates");
  const auto cut = std::min(rel.size(), static_cast<size_t>(r));
  const auto sum = detail::precision_prefix(rel, cut);
  return sum.weighted_precision / static_cast<double>(r);
}

enum class ApVariant { full, top_r, at_r };

inline ApVariant ap_variant_from_name(std::string_view name) {
  if (name == "ap") return ApVariant::full;
  if (name == "ap-top-r") return ApVariant::top_r;
  if (name == "ap-at-r") return ApVariant::at_r;
  throw UnknownPreset("no metric named '" + std::string(name) +
                      "' (expected ap, ap-top-r, or ap-at-r)");
}

inline double eval_ap_variant(const RankedRelevance& rel, ApVariant which) {
  switch (which) {
    case ApVariant::full: return average_precision(rel);
    case ApVariant::top_r: return ap_top_r(rel);
    case ApVariant::at_r: return ap_at_r(rel);
  }
  throw Error("unreachable");
}

struct MeanMetric {
  double mean = 0.0;
  int skipped = 0;  // queries with zero relevant candidates
};

inline MeanMetric mean_metric(const QuerySetResult& qs, ApVariant which) {
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (const auto& rel : qs.queries) {
    validate(rel);
    if (relevant_count(rel) == 0) {
      ++skipped;
      continue;
    }
    sum += eval_ap_variant(rel, which);
    ++used;
  }
  if (used == 0)
    throw NoRelevantItems("every query has zero relevant candidates");
  return {sum / static_cast<double>(used), skipped};
}

// One query per CSV row, comma-separated 0/1 entries. Blank lines and '#'
// comments are skipped.
inline QuerySetResult parse_relevance_csv(std::string_view content) {
  QuerySetResult out;
  int row = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++row;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    RankedRelevance rel;
    for (const auto& cell : text::split(line, ',')) {
      const long long v = text::parse_int(cell);
      if (v != 0 && v != 1)
        throw FormatError("row " + std::to_string(row) +
                          ": relevance entries must be 0 or 1");
      rel.push_back(static_cast<int>(v));
    }
    out.queries.push_back(std::move(rel));
  }
  if (out.queries.empty()) throw FormatError("no relevance rows found");
  return out;
}

inline QuerySetResult load_relevance_csv(const std::string& path) {
  return parse_relevance_csv(text::read_file(path));
}

}  // namespace balopt
