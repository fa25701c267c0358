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

// Column schema for CSV datasets.
//
// A schema file is line oriented. Blank lines and lines starting with '#'
// are ignored. Every other line is one of
//
//   header yes|no                      first CSV line holds column names
//   numeric     NAME                   real-valued feature
//   categorical NAME CAT1,CAT2,...     one indicator feature per category
//   ignore      NAME                   column is read and discarded
//   target      NAME LABEL0,LABEL1,... class column; LABELi maps to class i
//
// Column declarations appear in CSV column order. Exactly one target column
// is required. Categorical columns are dummy encoded with one 0/1 column per
// category, in the declared category order.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bdt/errors.hpp"

namespace bdt {

enum class ColumnRole { numeric, categorical, ignore, target };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::numeric;
  /// Category strings (categorical) or class labels (target).
  std::vector<std::string> values;
};

/// One column of the encoded feature matrix.
struct FeatureInfo {
  std::string name;
  /// Index of the schema column this feature was derived from.
  std::size_t source_column = 0;
  /// Set for dummy-encoded indicator columns.
  std::optional<std::string> category;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos
                                              ? std::string_view::npos
                                              : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

class Schema {
 public:
  Schema() = default;

  static Schema parse(std::string_view text) {
    Schema schema;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = detail::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      std::istringstream words{std::string(line)};
      std::string keyword, name;
      words >> keyword >> name;
      std::string rest;
      std::getline(words, rest);
      const std::string where = "schema line " + std::to_string(line_no);
      if (keyword == "header") {
        if (name != "yes" && name != "no") {
          throw DataError(where + ": header must be 'yes' or 'no'");
        }
        schema.has_header_ = name == "yes";
        continue;
      }
      if (name.empty()) throw DataError(where + ": missing column name");
      ColumnSpec col{name, ColumnRole::numeric, {}};
      if (keyword == "numeric") {
        col.role = ColumnRole::numeric;
      } else if (keyword == "ignore") {
        col.role = ColumnRole::ignore;
      } else if (keyword == "categorical" || keyword == "target") {
        col.role = keyword == "target" ? ColumnRole::target
                                       : ColumnRole::categorical;
        if (detail::trim(rest).empty()) {
          throw DataError(where + ": '" + keyword + "' needs a value list");
        }
        col.values = detail::split_list(detail::trim(rest), ',');
        std::unordered_set<std::string> seen;
        for (const auto& v : col.values) {
          if (v.empty()) throw DataError(where + ": empty value in list");
          if (!seen.insert(v).second) {
            throw DataError(where + ": duplicate value '" + v + "'");
          }
        }
      } else {
        throw DataError(where + ": unknown keyword '" + keyword + "'");
      }
      if (col.role != ColumnRole::categorical && col.role != ColumnRole::target &&
          !detail::trim(rest).empty()) {
        throw DataError(where + ": unexpected text after column name");
      }
      schema.columns_.push_back(std::move(col));
    }
    schema.validate();
    return schema;
  }

  static Schema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  /// Numeric-only schema with features x1..xd and integer class labels.
  static Schema numeric(std::size_t dims, std::size_t num_classes) {
    Schema schema;
    for (std::size_t r = 0; r < dims; ++r) {
      schema.columns_.push_back({"x" + std::to_string(r + 1), ColumnRole::numeric, {}});
    }
    ColumnSpec target{"y", ColumnRole::target, {}};
    for (std::size_t c = 0; c < num_classes; ++c) target.values.push_back(std::to_string(c));
    schema.columns_.push_back(std::move(target));
    schema.validate();
    return schema;
  }

  /// Canonical text form; parse(to_text()) reproduces the schema.
  std::string to_text() const {
    std::string out = std::string("header ") + (has_header_ ? "yes" : "no") + "\n";
    return out + layout_text();
  }

  /// Identifies the encoded layout (columns, roles, categories, labels).
  /// The header flag does not participate.
  std::uint64_t hash() const { return detail::fnv1a(layout_text()); }

  bool has_header() const { return has_header_; }
  const std::vector<ColumnSpec>& columns() const { return columns_; }
  std::size_t target_column() const { return target_; }
  const std::vector<std::string>& class_labels() const {
    return columns_[target_].values;
  }
  std::size_t num_classes() const { return class_labels().size(); }

  std::size_t encoded_width() const {
    std::size_t width = 0;
    for (const auto& c : columns_) {
      if (c.role == ColumnRole::numeric) width += 1;
      if (c.role == ColumnRole::categorical) width += c.values.size();
    }
    return width;
  }

  std::vector<FeatureInfo> encoded_features() const {
    std::vector<FeatureInfo> out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& c = columns_[i];
      if (c.role == ColumnRole::numeric) out.push_back({c.name, i, std::nullopt});
      if (c.role == ColumnRole::categorical) {
        for (const auto& v : c.values) out.push_back({c.name + "=" + v, i, v});
      }
    }
    return out;
  }

  std::optional<std::size_t> class_index(std::string_view label) const {
    const auto& labels = class_labels();
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c] == label) return c;
    }
    return std::nullopt;
  }

 private:
  std::string layout_text() const {
    std::string out;
    for (const auto& c : columns_) {
      switch (c.role) {
        case ColumnRole::numeric: out += "numeric "; break;
        case ColumnRole::categorical: out += "categorical "; break;
        case ColumnRole::ignore: out += "ignore "; break;
        case ColumnRole::target: out += "target "; break;
      }
      out += c.name;
      for (std::size_t v = 0; v < c.values.size(); ++v) {
        out += (v == 0 ? " " : ",") + c.values[v];
      }
      out += "\n";
    }
    return out;
  }

  void validate() {
    std::size_t targets = 0;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].role == ColumnRole::target) {
        ++targets;
        target_ = i;
      }
    }
    if (targets != 1) {
      throw DataError("schema must declare exactly one target column, found " +
                      std::to_string(targets));
    }
    if (encoded_width() == 0) throw DataError("schema declares no feature columns");
    if (num_classes() < 2) throw DataError("target needs at least two class labels");
  }

  std::vector<ColumnSpec> columns_;
  std::size_t target_ = 0;
  bool has_header_ = true;
};

}  // namespace bdt
