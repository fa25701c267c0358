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

// Bayesian decision trees.
//
// A tree is grown top down: every node chooses a partition of its rows with a
// pluggable chooser (the modal partition by default, which yields the
// greedy-modal tree). A trivial choice turns the node into a leaf holding the
// Dirichlet posterior of its region; a split turns it into a sprout whose two
// children are grown the same way one level deeper. There is no pruning pass.
//
// The unnormalized tree log-probability is the sum, over leaves, of the
// trivial-partition logprob each leaf was closed with.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bdt/dataset.hpp"
#include "bdt/errors.hpp"
#include "bdt/partition.hpp"
#include "bdt/schema.hpp"

namespace bdt {

using NodeId = std::uint32_t;

struct GmtConfig {
  /// Dirichlet prior of the root. Empty means 10 pseudo-counts per class.
  DirichletParams prior;
  PriorConfig partition_prior;
  /// Smoothing proportion: a child's prior is its parent's plus
  /// delta * (class counts of the child).
  double delta = 0.0;
  /// Nodes at this depth are forced to be leaves. Unbounded by default.
  std::optional<std::size_t> max_depth;

  DirichletParams root_prior(std::size_t num_classes) const {
    if (prior.size() == 0) return DirichletParams::symmetric(num_classes, 10.0);
    prior.check_length(num_classes);
    return prior;
  }

  void validate() const {
    partition_prior.validate();
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw std::invalid_argument("smoothing delta must be >= 0, got " +
                                  std::to_string(delta));
    }
  }
};

struct Leaf {
  DirichletParams posterior;
  /// Training rows that reached this leaf.
  std::size_t support = 0;
  /// Trivial-partition logprob the leaf was closed with.
  double logprob = 0.0;
};

struct Sprout {
  std::size_t dim = 0;
  double threshold = 0.0;
  NodeId lower = 0;
  NodeId upper = 0;
  std::size_t support = 0;
  double loglike = 0.0;
  double logprob = 0.0;
};

struct TreeNode {
  std::size_t depth = 0;
  std::variant<Leaf, Sprout> body;

  bool is_leaf() const { return std::holds_alternative<Leaf>(body); }
  const Leaf& leaf() const { return std::get<Leaf>(body); }
  const Sprout& sprout() const { return std::get<Sprout>(body); }
};

/// `prior + delta * child_counts`, component-wise.
inline DirichletParams smoothed_child_prior(const DirichletParams& parent_prior,
                                            std::span<const std::size_t> child_counts,
                                            double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("smoothing delta must be >= 0");
  if (delta == 0.0) {
    parent_prior.check_length(child_counts.size());
    return parent_prior;
  }
  return parent_prior.updated(child_counts, delta);
}

class BayesianTree {
 public:
  BayesianTree() = default;
  BayesianTree(std::vector<TreeNode> nodes, double log_prob, GmtConfig config,
               std::size_t dims, std::size_t num_classes,
               std::vector<FeatureInfo> features = {},
               std::shared_ptr<const Schema> schema = nullptr)
      : nodes_(std::move(nodes)),
        log_prob_(log_prob),
        config_(std::move(config)),
        dims_(dims),
        num_classes_(num_classes),
        features_(std::move(features)),
        schema_(std::move(schema)) {
    if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
    if (features_.empty()) {
      for (std::size_t r = 0; r < dims_; ++r) {
        features_.push_back({"x" + std::to_string(r + 1), r, std::nullopt});
      }
    }
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_[id]; }
  const TreeNode& root() const { return nodes_.front(); }
  double log_prob() const { return log_prob_; }
  const GmtConfig& config() const { return config_; }
  std::size_t dims() const { return dims_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<FeatureInfo>& features() const { return features_; }
  const std::shared_ptr<const Schema>& schema() const { return schema_; }

  std::size_t leaf_count() const {
    std::size_t count = 0;
    for (const auto& n : nodes_) count += n.is_leaf() ? 1 : 0;
    return count;
  }

  /// Depth of the deepest leaf (0 for a single leaf).
  std::size_t depth() const {
    std::size_t deepest = 0;
    for (const auto& n : nodes_) deepest = std::max(deepest, n.depth);
    return deepest;
  }

  /// Leaf reached by `x`: x[dim] <= threshold goes to the lower child.
  NodeId route(std::span<const double> x) const {
    check_dims(x.size());
    NodeId id = 0;
    while (!nodes_[id].is_leaf()) {
      const auto& s = nodes_[id].sprout();
      id = x[s.dim] <= s.threshold ? s.lower : s.upper;
    }
    return id;
  }

  /// Node ids from the root to the leaf reached by `x`.
  std::vector<NodeId> path(std::span<const double> x) const {
    check_dims(x.size());
    std::vector<NodeId> ids{0};
    while (!nodes_[ids.back()].is_leaf()) {
      const auto& s = nodes_[ids.back()].sprout();
      ids.push_back(x[s.dim] <= s.threshold ? s.lower : s.upper);
    }
    return ids;
  }

  void check_dims(std::size_t size) const {
    if (size != dims_) {
      throw SchemaMismatch("input has " + std::to_string(size) +
                           " features, model expects " + std::to_string(dims_));
    }
  }

 private:
  std::vector<TreeNode> nodes_;
  double log_prob_ = 0.0;
  GmtConfig config_;
  std::size_t dims_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<FeatureInfo> features_;
  std::shared_ptr<const Schema> schema_;
};

/// Chooses the partition of one node: (rows, node prior, partition prior
/// config, depth) -> choice. The returned split must be one of the node's
/// candidates.
using PartitionChooser = std::function<PartitionChoice(
    const SubsetView&, const DirichletParams&, const PriorConfig&, std::size_t)>;

/// Modal partition via the Dirichlet-multinomial sweep.
struct ModalClassificationChooser {
  PartitionChoice operator()(const SubsetView& view, const DirichletParams& prior,
                             const PriorConfig& cfg, std::size_t depth) const {
    return find_modal_partition_classification(view, prior, cfg, depth);
  }
};

/// Modal partition via the general search with a Dirichlet-multinomial model.
struct ModalGeneralChooser {
  PartitionChoice operator()(const SubsetView& view, const DirichletParams& prior,
                             const PriorConfig& cfg, std::size_t depth) const {
    return find_modal_partition_general(view, DirichletMultinomial(prior), cfg, depth);
  }
};

namespace detail {

struct GrowTask {
  NodeId node;
  std::size_t begin;
  std::size_t end;
  std::size_t depth;
  DirichletParams prior;
};

}  // namespace detail

/// Grows a tree over `rows`. When `forced_root` is set it is used as the
/// root's partition instead of asking the chooser.
///
/// Each node's rows occupy the same [begin, end) range of every per-dimension
/// sorted array in one workspace; a split stable-partitions each range into
/// its lower and upper halves. Nodes are processed from an explicit stack.
inline BayesianTree build_tree(const SubsetView& rows, const GmtConfig& cfg,
                               const PartitionChooser& choose,
                               const std::optional<PartitionChoice>& forced_root = std::nullopt) {
  cfg.validate();
  if (rows.empty()) throw DataError("empty dataset");
  const DataSet& data = rows.data();
  const std::size_t n = rows.size();
  const std::size_t d = rows.dims();
  const DirichletParams root_prior = cfg.root_prior(rows.num_classes());

  std::vector<RowIndex> workspace(n * d);
  for (std::size_t r = 0; r < d; ++r) {
    std::copy(rows.sorted(r).begin(), rows.sorted(r).end(), workspace.begin() + r * n);
  }
  std::vector<RowIndex> scratch(n);
  std::vector<char> goes_lower(data.size(), 0);

  auto node_view = [&](std::size_t begin, std::size_t end) {
    std::vector<std::span<const RowIndex>> spans;
    spans.reserve(d);
    for (std::size_t r = 0; r < d; ++r) {
      spans.emplace_back(workspace.data() + r * n + begin, end - begin);
    }
    return SubsetView(data, std::move(spans));
  };

  std::vector<TreeNode> nodes(1);
  double log_prob = 0.0;
  std::vector<detail::GrowTask> stack;
  stack.push_back({0, 0, n, 0, root_prior});

  while (!stack.empty()) {
    detail::GrowTask task = std::move(stack.back());
    stack.pop_back();
    const SubsetView view = node_view(task.begin, task.end);
    const std::size_t size = task.end - task.begin;

    PartitionChoice choice;
    if (task.depth == 0 && forced_root) {
      choice = *forced_root;
    } else if (cfg.max_depth && task.depth >= *cfg.max_depth) {
      choice = trivial_partition(view, task.prior, cfg.partition_prior, task.depth);
    } else {
      choice = choose(view, task.prior, cfg.partition_prior, task.depth);
    }

    if (!choice.is_split()) {
      const auto counts = view.class_counts();
      nodes[task.node] =
          TreeNode{task.depth, Leaf{task.prior.updated(counts), size, choice.logprob}};
      log_prob += choice.logprob;
      continue;
    }

    // Mark the lower side and count its classes.
    std::vector<std::size_t> lower_counts(rows.num_classes(), 0);
    std::vector<std::size_t> upper_counts(rows.num_classes(), 0);
    std::size_t n_lower = 0;
    for (RowIndex i : view.sorted(choice.dim)) {
      const bool lower = data.value(i, choice.dim) <= choice.threshold;
      goes_lower[i] = lower ? 1 : 0;
      ++(lower ? lower_counts : upper_counts)[data.label(i)];
      n_lower += lower ? 1 : 0;
    }
    if (n_lower == 0 || n_lower == size) {
      throw std::logic_error("chosen split at " + std::to_string(choice.threshold) +
                             " on dimension " + std::to_string(choice.dim) +
                             " does not separate the node");
    }
    for (std::size_t r = 0; r < d; ++r) {
      RowIndex* seg = workspace.data() + r * n + task.begin;
      std::size_t lo = 0;
      std::size_t hi = 0;
      for (std::size_t j = 0; j < size; ++j) {
        if (goes_lower[seg[j]]) {
          seg[lo++] = seg[j];
        } else {
          scratch[hi++] = seg[j];
        }
      }
      std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(hi), seg + lo);
    }

    const auto lower_id = static_cast<NodeId>(nodes.size());
    const auto upper_id = static_cast<NodeId>(nodes.size() + 1);
    nodes.emplace_back();
    nodes.emplace_back();
    nodes[task.node] = TreeNode{
        task.depth, Sprout{choice.dim, choice.threshold, lower_id, upper_id, size,
                           choice.loglike, choice.logprob}};
    const std::size_t mid = task.begin + n_lower;
    stack.push_back({upper_id, mid, task.end, task.depth + 1,
                     smoothed_child_prior(task.prior, upper_counts, cfg.delta)});
    stack.push_back({lower_id, task.begin, mid, task.depth + 1,
                     smoothed_child_prior(task.prior, lower_counts, cfg.delta)});
  }

  GmtConfig snapshot = cfg;
  snapshot.prior = root_prior;
  return BayesianTree(std::move(nodes), log_prob, std::move(snapshot), d,
                      rows.num_classes(), data.features(), data.schema());
}

/// The greedy-modal tree.
inline BayesianTree build_gmt(const SubsetView& rows, const GmtConfig& cfg = {}) {
  return build_tree(rows, cfg, ModalClassificationChooser{});
}

inline BayesianTree build_gmt(const DataSet& data, const GmtConfig& cfg = {}) {
  return build_gmt(data.view(), cfg);
}

/// Posterior of the leaf reached by `x`.
inline const DirichletParams& predict_posterior(const BayesianTree& tree,
                                                std::span<const double> x) {
  return tree.node(tree.route(x)).leaf().posterior;
}

/// Posterior mean E[q] at the leaf reached by `x`.
inline std::vector<double> predict_proba(const BayesianTree& tree, std::span<const double> x) {
  return predict_posterior(tree, x).mean();
}

/// Index of the largest probability; ties go to the lowest class index.
inline Label argmax_class(std::span<const double> proba) {
  Label best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[best] < proba[c]) best = static_cast<Label>(c);
  }
  return best;
}

inline Label predict_class(const BayesianTree& tree, std::span<const double> x) {
  return argmax_class(predict_proba(tree, x));
}

}  // namespace bdt
