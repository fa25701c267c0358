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

// Ensembles of greedy-modal trees with distinct roots.
//
// The first member is the greedy-modal tree. Every further member forces its
// root onto the next best split candidate of the root node (by logprob,
// canonical order on ties) and grows greedily below it. Weights are the tree
// probabilities normalized over the members.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdt/partition.hpp"
#include "bdt/tree.hpp"

namespace bdt {

struct TreeEnsemble {
  std::vector<BayesianTree> trees;
  std::vector<double> weights;
  /// Number of trees asked for; more than trees.size() when the root node
  /// ran out of candidates.
  std::size_t requested = 0;

  bool truncated() const { return trees.size() < requested; }
  std::size_t dims() const { return trees.front().dims(); }
  std::size_t num_classes() const { return trees.front().num_classes(); }
};

/// exp(v_i) / sum_j exp(v_j), computed with the max shift.
inline std::vector<double> normalized_weights(std::span<const double> log_values) {
  if (log_values.empty()) return {};
  const double top = *std::max_element(log_values.begin(), log_values.end());
  std::vector<double> w;
  w.reserve(log_values.size());
  double total = 0.0;
  for (double v : log_values) total += w.emplace_back(std::exp(v - top));
  for (double& v : w) v /= total;
  return w;
}

inline TreeEnsemble make_ensemble(std::vector<BayesianTree> trees, std::size_t requested = 0) {
  if (trees.empty()) throw std::invalid_argument("ensemble needs at least one tree");
  std::vector<double> logs;
  for (const auto& t : trees) logs.push_back(t.log_prob());
  TreeEnsemble e;
  e.weights = normalized_weights(logs);
  e.requested = std::max(requested, trees.size());
  e.trees = std::move(trees);
  return e;
}

inline TreeEnsemble build_ensemble_distinct_roots(const SubsetView& rows, const GmtConfig& cfg,
                                                  std::size_t count) {
  if (count == 0) throw std::invalid_argument("ensemble size must be at least 1");
  if (rows.empty()) throw DataError("empty dataset");
  const DirichletParams root_prior = cfg.root_prior(rows.num_classes());
  auto candidates =
      enumerate_partitions_classification(rows, root_prior, cfg.partition_prior, 0);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const PartitionChoice& a, const PartitionChoice& b) {
                     return a.logprob > b.logprob;
                   });

  std::vector<BayesianTree> trees;
  trees.push_back(build_gmt(rows, cfg));
  const PartitionChoice& modal = candidates.front();
  for (const auto& c : candidates) {
    if (trees.size() == count) break;
    if (!c.is_split()) continue;
    if (modal.is_split() && c.dim == modal.dim && c.index == modal.index) continue;
    trees.push_back(build_tree(rows, cfg, ModalClassificationChooser{}, c));
  }
  return make_ensemble(std::move(trees), count);
}

inline TreeEnsemble build_ensemble_distinct_roots(const DataSet& data, const GmtConfig& cfg,
                                                  std::size_t count) {
  return build_ensemble_distinct_roots(data.view(), cfg, count);
}

/// Weighted average of the members' posterior means.
inline std::vector<double> predict_proba(const TreeEnsemble& model, std::span<const double> x) {
  std::vector<double> out(model.num_classes(), 0.0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto p = predict_proba(model.trees[t], x);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += model.weights[t] * p[c];
  }
  return out;
}

inline Label predict_class(const TreeEnsemble& model, std::span<const double> x) {
  return argmax_class(predict_proba(model, x));
}

}  // namespace bdt
