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

// In-memory training data and row subsets.
//
// A DataSet owns an n x d feature matrix (stored column major), the class
// label of every row, and for every dimension the row indices sorted by that
// feature. Ties are broken by row index, so the order is unique.
//
// A SubsetView selects rows of a DataSet and carries, per dimension, the
// selected rows in the parent's sorted order. Subsets are built by stable
// filtering of the parent arrays, never by re-sorting, which keeps a split
// O(d n). A view refers to its DataSet by pointer; the DataSet must outlive
// every view of it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bdt/errors.hpp"
#include "bdt/schema.hpp"

namespace bdt {

using RowIndex = std::uint32_t;
using Label = std::uint32_t;

class SubsetView;

class DataSet {
 public:
  /// `column_major[dim * rows + row]` is feature `dim` of row `row`.
  DataSet(std::size_t rows, std::size_t dims, std::size_t num_classes,
          std::vector<double> column_major, std::vector<Label> labels,
          std::vector<FeatureInfo> features = {},
          std::shared_ptr<const Schema> schema = nullptr)
      : rows_(rows),
        dims_(dims),
        num_classes_(num_classes),
        values_(std::move(column_major)),
        labels_(std::move(labels)),
        features_(std::move(features)),
        schema_(std::move(schema)) {
    if (rows_ == 0) throw DataError("empty dataset");
    if (dims_ == 0) throw DataError("dataset has no feature columns");
    if (num_classes_ < 2) throw DataError("need at least two classes");
    if (values_.size() != rows_ * dims_) {
      throw DataError("feature matrix has " + std::to_string(values_.size()) +
                      " values, expected " + std::to_string(rows_ * dims_));
    }
    if (labels_.size() != rows_) {
      throw DataError("got " + std::to_string(labels_.size()) + " labels for " +
                      std::to_string(rows_) + " rows");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw DataError("non-finite feature value at row " +
                        std::to_string(i % rows_) + ", dimension " +
                        std::to_string(i / rows_));
      }
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (labels_[i] >= num_classes_) {
        throw DataError("label " + std::to_string(labels_[i]) + " at row " +
                        std::to_string(i) + " is outside 0.." +
                        std::to_string(num_classes_ - 1));
      }
    }
    if (features_.empty()) {
      for (std::size_t r = 0; r < dims_; ++r) {
        features_.push_back({"x" + std::to_string(r + 1), r, std::nullopt});
      }
    }
    if (features_.size() != dims_) throw DataError("feature info size mismatch");
    build_sorted_indices();
  }

  /// Builds from row-major data. With `num_classes == 0` the class count is
  /// max(label) + 1 (at least 2).
  static DataSet from_rows(std::span<const std::vector<double>> rows,
                           std::vector<Label> labels,
                           std::size_t num_classes = 0) {
    if (rows.empty()) throw DataError("empty dataset");
    const std::size_t d = rows.front().size();
    std::vector<double> values(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) {
        throw DataError("row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " features, expected " +
                        std::to_string(d));
      }
      for (std::size_t r = 0; r < d; ++r) values[r * rows.size() + i] = rows[i][r];
    }
    if (num_classes == 0) {
      const Label max_label =
          labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
      num_classes = std::max<std::size_t>(2, std::size_t{max_label} + 1);
    }
    return DataSet(rows.size(), d, num_classes, std::move(values), std::move(labels));
  }

  std::size_t size() const { return rows_; }
  std::size_t dims() const { return dims_; }
  std::size_t num_classes() const { return num_classes_; }

  double value(RowIndex row, std::size_t dim) const {
    return values_[dim * rows_ + row];
  }
  std::span<const double> column(std::size_t dim) const {
    return {values_.data() + dim * rows_, rows_};
  }
  std::vector<double> row(RowIndex row) const {
    std::vector<double> x(dims_);
    for (std::size_t r = 0; r < dims_; ++r) x[r] = value(row, r);
    return x;
  }
  Label label(RowIndex row) const { return labels_[row]; }
  std::span<const Label> labels() const { return labels_; }

  /// Rows ordered by feature `dim` ascending, ties by row index.
  std::span<const RowIndex> sorted(std::size_t dim) const {
    return {sorted_.data() + dim * rows_, rows_};
  }

  const std::vector<FeatureInfo>& features() const { return features_; }
  const std::shared_ptr<const Schema>& schema() const { return schema_; }

  /// View over every row.
  SubsetView view() const;

 private:
  void build_sorted_indices() {
    sorted_.resize(rows_ * dims_);
    for (std::size_t r = 0; r < dims_; ++r) {
      auto first = sorted_.begin() + static_cast<std::ptrdiff_t>(r * rows_);
      auto last = first + static_cast<std::ptrdiff_t>(rows_);
      std::iota(first, last, RowIndex{0});
      const double* col = values_.data() + r * rows_;
      std::stable_sort(first, last,
                       [col](RowIndex a, RowIndex b) { return col[a] < col[b]; });
    }
  }

  std::size_t rows_;
  std::size_t dims_;
  std::size_t num_classes_;
  std::vector<double> values_;
  std::vector<Label> labels_;
  std::vector<FeatureInfo> features_;
  std::shared_ptr<const Schema> schema_;
  std::vector<RowIndex> sorted_;
};

class SubsetView {
 public:
  /// Non-owning view: `sorted[r]` must stay valid for the view's lifetime.
  /// `storage` optionally keeps the referenced arrays alive.
  SubsetView(const DataSet& data, std::vector<std::span<const RowIndex>> sorted,
             std::shared_ptr<const std::vector<RowIndex>> storage = nullptr)
      : data_(&data), sorted_(std::move(sorted)), storage_(std::move(storage)) {}

  const DataSet& data() const { return *data_; }
  std::size_t size() const { return sorted_.empty() ? 0 : sorted_.front().size(); }
  bool empty() const { return size() == 0; }
  std::size_t dims() const { return data_->dims(); }
  std::size_t num_classes() const { return data_->num_classes(); }

  std::span<const RowIndex> sorted(std::size_t dim) const { return sorted_[dim]; }
  double value(RowIndex row, std::size_t dim) const { return data_->value(row, dim); }
  Label label(RowIndex row) const { return data_->label(row); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (RowIndex i : sorted_.front()) ++counts[data_->label(i)];
    return counts;
  }

  /// Member rows in ascending row order.
  std::vector<RowIndex> members() const {
    std::vector<RowIndex> out(sorted_.front().begin(), sorted_.front().end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const DataSet* data_;
  std::vector<std::span<const RowIndex>> sorted_;
  std::shared_ptr<const std::vector<RowIndex>> storage_;
};

inline SubsetView DataSet::view() const {
  std::vector<std::span<const RowIndex>> spans;
  spans.reserve(dims_);
  for (std::size_t r = 0; r < dims_; ++r) spans.push_back(sorted(r));
  return SubsetView(*this, std::move(spans));
}

/// Rows of `parent` for which `keep(row)` holds, with every sorted array
/// obtained by stable filtering of the parent's.
template <class Predicate>
SubsetView make_subset(const SubsetView& parent, Predicate keep) {
  const std::size_t d = parent.dims();
  std::vector<char> selected(parent.data().size(), 0);
  std::size_t m = 0;
  for (RowIndex i : parent.sorted(0)) {
    if (keep(i)) {
      selected[i] = 1;
      ++m;
    }
  }
  auto storage = std::make_shared<std::vector<RowIndex>>();
  storage->reserve(m * d);
  for (std::size_t r = 0; r < d; ++r) {
    for (RowIndex i : parent.sorted(r)) {
      if (selected[i]) storage->push_back(i);
    }
  }
  std::vector<std::span<const RowIndex>> spans;
  spans.reserve(d);
  for (std::size_t r = 0; r < d; ++r) spans.emplace_back(storage->data() + r * m, m);
  return SubsetView(parent.data(), std::move(spans), std::move(storage));
}

template <class Predicate>
SubsetView make_subset(const DataSet& parent, Predicate keep) {
  return make_subset(parent.view(), std::move(keep));
}

}  // namespace bdt
