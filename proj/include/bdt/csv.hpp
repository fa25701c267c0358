// Copyright 2026 The bdt Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV reading under a Schema.
//
// Dialect: comma separated, '.' decimal point, optional header line (per the
// schema), surrounding whitespace and double quotes are stripped from every
// field. Quoted fields cannot contain commas. Empty fields and '?' are
// treated as missing values and rejected.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdt/dataset.hpp"
#include "bdt/errors.hpp"
#include "bdt/schema.hpp"

namespace bdt {

/// Splits one CSV line into trimmed, unquoted fields.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields = detail::split_list(line, ',');
  for (auto& f : fields) {
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') {
      f = std::string(detail::trim(std::string_view(f).substr(1, f.size() - 2)));
    }
  }
  return fields;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

struct EncodedRow {
  std::vector<double> features;
  std::optional<Label> label;
};

/// Encodes one row of raw fields. A row may omit the target column only
/// when `target_optional` is set (prediction inputs). `where` prefixes
/// error messages, e.g. "data.csv:12".
inline EncodedRow encode_fields(const std::vector<std::string>& fields,
                                const Schema& schema, const std::string& where,
                                bool target_optional = false) {
  const auto& cols = schema.columns();
  const bool has_target = fields.size() == cols.size();
  if (!has_target && !(target_optional && fields.size() + 1 == cols.size())) {
    throw DataError(where + ": expected " + std::to_string(cols.size()) +
                    " fields, got " + std::to_string(fields.size()));
  }
  EncodedRow out;
  out.features.reserve(schema.encoded_width());
  std::size_t f = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& col = cols[c];
    if (col.role == ColumnRole::target && !has_target) continue;
    const std::string& raw = fields[f++];
    const std::string ctx = where + ": column '" + col.name + "'";
    if (raw.empty() || raw == "?") throw DataError(ctx + ": missing value");
    switch (col.role) {
      case ColumnRole::ignore:
        break;
      case ColumnRole::numeric: {
        const auto v = parse_number(raw);
        if (!v || !std::isfinite(*v)) {
          throw DataError(ctx + ": cannot parse '" + raw + "' as a number");
        }
        out.features.push_back(*v);
        break;
      }
      case ColumnRole::categorical: {
        bool found = false;
        for (const auto& cat : col.values) {
          const bool hit = cat == raw;
          found = found || hit;
          out.features.push_back(hit ? 1.0 : 0.0);
        }
        if (!found) throw DataError(ctx + ": unknown category '" + raw + "'");
        break;
      }
      case ColumnRole::target: {
        const auto cls = schema.class_index(raw);
        if (!cls) throw DataError(ctx + ": unknown class label '" + raw + "'");
        out.label = static_cast<Label>(*cls);
        break;
      }
    }
  }
  return out;
}

/// Reads a whole CSV stream. `source` names the stream in error messages.
inline DataSet read_csv(std::istream& in, const Schema& schema,
                        const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (schema.has_header()) {
    bool found = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::trim(line).empty()) {
        found = true;
        break;
      }
    }
    if (!found) throw DataError(source + ": empty dataset");
    const auto names = split_csv_line(line);
    const auto& cols = schema.columns();
    if (names.size() != cols.size()) {
      throw DataError(source + ":" + std::to_string(line_no) + ": header has " +
                      std::to_string(names.size()) + " columns, schema declares " +
                      std::to_string(cols.size()));
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (names[c] != cols[c].name) {
        throw DataError(source + ":" + std::to_string(line_no) + ": header column " +
                        std::to_string(c + 1) + " is '" + names[c] +
                        "', schema expects '" + cols[c].name + "'");
      }
    }
  }
  const std::size_t d = schema.encoded_width();
  std::vector<std::vector<double>> columns(d);
  std::vector<Label> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto row = encode_fields(split_csv_line(line), schema,
                             source + ":" + std::to_string(line_no));
    for (std::size_t r = 0; r < d; ++r) columns[r].push_back(row.features[r]);
    labels.push_back(*row.label);
  }
  if (labels.empty()) throw DataError(source + ": empty dataset");
  std::vector<double> values;
  values.reserve(d * labels.size());
  for (auto& col : columns) values.insert(values.end(), col.begin(), col.end());
  const std::size_t n = labels.size();
  return DataSet(n, d, schema.num_classes(), std::move(values), std::move(labels),
                 schema.encoded_features(), std::make_shared<const Schema>(schema));
}

inline DataSet load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in, schema, path);
}

}  // namespace bdt
