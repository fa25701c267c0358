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

// Training straight from numeric arrays, for embedding and language bindings.

#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "bdt/dataset.hpp"
#include "bdt/ensemble.hpp"
#include "bdt/errors.hpp"
#include "bdt/tree.hpp"

namespace bdt {

/// Copies an n x d row-major matrix into a DataSet. Labels must be 0..C-1;
/// with num_classes == 0 the class count is max(label) + 1 (at least 2).
inline DataSet dataset_from_arrays(std::span<const double> row_major, std::size_t n,
                                   std::size_t d, std::span<const Label> labels,
                                   std::size_t num_classes = 0) {
  if (row_major.size() != n * d) {
    throw DataError("feature array has " + std::to_string(row_major.size()) +
                    " values, expected " + std::to_string(n) + " x " + std::to_string(d));
  }
  if (labels.size() != n) {
    throw DataError("got " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(n) + " rows");
  }
  if (n == 0) throw DataError("empty dataset");
  if (num_classes == 0) {
    Label top = 0;
    for (Label y : labels) top = std::max(top, y);
    num_classes = std::max<std::size_t>(2, std::size_t{top} + 1);
  }
  std::vector<double> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < d; ++r) values[r * n + i] = row_major[i * d + r];
  }
  return DataSet(n, d, num_classes, std::move(values),
                 std::vector<Label>(labels.begin(), labels.end()));
}

inline BayesianTree fit_gmt(std::span<const double> row_major, std::size_t n, std::size_t d,
                            std::span<const Label> labels, const GmtConfig& cfg = {},
                            std::size_t num_classes = 0) {
  const DataSet data = dataset_from_arrays(row_major, n, d, labels, num_classes);
  return build_gmt(data, cfg);
}

inline TreeEnsemble fit_ensemble(std::span<const double> row_major, std::size_t n,
                                 std::size_t d, std::span<const Label> labels,
                                 const GmtConfig& cfg, std::size_t trees,
                                 std::size_t num_classes = 0) {
  const DataSet data = dataset_from_arrays(row_major, n, d, labels, num_classes);
  return build_ensemble_distinct_roots(data, cfg, trees);
}

}  // namespace bdt
