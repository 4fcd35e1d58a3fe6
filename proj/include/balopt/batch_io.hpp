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
// Labeled-batch file formats. JSON documents carry "labels", "distances",
// and an optional "mask"; CSV files carry a labels row followed by the
// b rows of the distance matrix.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "balopt/errors.hpp"
#include "balopt/losses.hpp"
#include "balopt/text.hpp"

namespace balopt {

inline LabeledBatch parse_batch_json(std::string_view content) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("batch JSON: ") + e.what());
  }
  LabeledBatch batch;
  try {
    batch.labels = doc.at("labels").get<std::vector<int>>();
    batch.distances =
        doc.at("distances").get<std::vector<std::vector<double>>>();
    if (doc.contains("mask"))
      batch.mask =
          doc.at("mask").get<std::vector<std::vector<std::uint8_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("batch JSON: ") + e.what());
  }
  validate(batch);
  return batch;
}

inline LabeledBatch parse_batch_csv(std::string_view content) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  bool labels_seen = false;
  int row_no = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++row_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = text::split(line, ',');
    if (!labels_seen) {
      for (const auto& c : cells)
        labels.push_back(static_cast<int>(text::parse_int(c)));
      labels_seen = true;
      continue;
    }
    std::vector<double> row;
    try {
      for (const auto& c : cells) row.push_back(text::parse_double(c));
    } catch (const FormatError& e) {
      throw FormatError("row " + std::to_string(row_no) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (!labels_seen) throw FormatError("batch CSV is empty");
  LabeledBatch batch{std::move(labels), std::move(rows), {}};
  validate(batch);
  return batch;
}

inline LabeledBatch load_batch(const std::string& path) {
  const auto content = text::read_file(path);
  const auto body = text::trim(content);
  if (!body.empty() && body.front() == '{') return parse_batch_json(body);
  return parse_batch_csv(content);
}

}  // namespace balopt
