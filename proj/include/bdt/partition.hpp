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

// The partition space of a node and its modal element.
//
// For a node holding rows D, the candidate partitions are the trivial
// partition (no split, the node becomes a leaf) and, for every dimension r and
// every pair of adjacent distinct sorted values a < b along r, the split
// {x_r <= h, x_r > h} at the midpoint h of a and b. Every candidate gets
//
//   loglike = sum over its cells of ln L(cell outcomes)   (marginal likelihood)
//   logprob = loglike + ln p(partition)                   (unnormalized posterior)
//
// and the modal partition is the candidate with the largest logprob.
//
// Scan order is canonical: trivial first, then dimensions ascending, then
// thresholds ascending. An incumbent is only replaced by a strictly larger
// logprob, so on ties the earliest candidate in scan order wins.
//
// All probability work is done in log space.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdt/dataset.hpp"
#include "bdt/log_beta.hpp"

namespace bdt {

/// Dirichlet pseudo-counts (alpha_1, ..., alpha_C), all positive.
class DirichletParams {
 public:
  DirichletParams() = default;
  explicit DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw std::invalid_argument("Dirichlet parameters are empty");
    for (double a : alpha_) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("Dirichlet parameters must be positive, got " +
                                    std::to_string(a));
      }
    }
  }
  DirichletParams(std::initializer_list<double> alpha)
      : DirichletParams(std::vector<double>(alpha)) {}

  static DirichletParams symmetric(std::size_t classes, double value) {
    return DirichletParams(std::vector<double>(classes, value));
  }

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t c) const { return alpha_[c]; }
  std::span<const double> alpha() const { return alpha_; }
  double sum() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

  /// Dirichlet mean alpha_c / sum(alpha).
  std::vector<double> mean() const {
    const double total = sum();
    std::vector<double> m(alpha_.size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = alpha_[c] / total;
    return m;
  }

  /// Conjugate update: alpha + weight * counts.
  DirichletParams updated(std::span<const std::size_t> counts, double weight = 1.0) const {
    check_length(counts.size());
    std::vector<double> out(alpha_);
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] += weight * static_cast<double>(counts[c]);
    }
    return DirichletParams(std::move(out));
  }

  void check_length(std::size_t classes) const {
    if (classes != alpha_.size()) {
      throw std::invalid_argument("expected " + std::to_string(alpha_.size()) +
                                  " classes, got " + std::to_string(classes));
    }
  }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
};

/// Dirichlet-multinomial marginal log-likelihood of an outcome sequence with
/// the given class counts: ln B(alpha + counts) - ln B(alpha). Zero for an
/// empty sequence.
inline double dm_marginal_loglike(std::span<const std::size_t> counts,
                                  const DirichletParams& prior) {
  prior.check_length(counts.size());
  if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; })) {
    return 0.0;
  }
  const DirichletParams post = prior.updated(counts);
  return log_beta(post.alpha()) - log_beta(prior.alpha());
}

enum class PartitionKind : std::uint8_t { trivial, split };

struct PartitionChoice {
  PartitionKind kind = PartitionKind::trivial;
  /// Split dimension (0-based).
  std::size_t dim = 0;
  /// Position of this threshold among the dimension's candidates (0-based).
  std::size_t index = 0;
  double threshold = 0.0;
  /// ln L(D | partition).
  double loglike = 0.0;
  /// ln of the unnormalized posterior, loglike + ln p(partition).
  double logprob = -std::numeric_limits<double>::infinity();

  bool is_split() const { return kind == PartitionKind::split; }
};

enum class PartitionPrior : std::uint8_t {
  /// p(trivial) = 1 - g^e, p(split on r) = g^e / (d N_r), e = 1 + depth
  /// (or e = 1 when not depth dependent).
  depth_geometric,
  /// Every candidate in the node's space equally likely.
  uniform,
};

struct PriorConfig {
  PartitionPrior kind = PartitionPrior::depth_geometric;
  double g = 0.99;
  bool depth_dependent = true;

  void validate() const {
    if (!(g > 0.0 && g < 1.0)) {
      throw std::invalid_argument("split continuation g must lie in (0, 1), got " +
                                  std::to_string(g));
    }
  }
};

/// ln p(partition) under the depth-geometric prior. `dims` is the full
/// feature count and `splits_on_dim` the number of candidate thresholds on
/// the split's dimension (ignored for the trivial partition).
inline double partition_log_prior(PartitionKind kind, std::size_t depth, std::size_t dims,
                                  std::size_t splits_on_dim, const PriorConfig& cfg) {
  cfg.validate();
  const double exponent = cfg.depth_dependent ? 1.0 + static_cast<double>(depth) : 1.0;
  const double log_continue = exponent * std::log(cfg.g);
  if (kind == PartitionKind::trivial) return std::log(-std::expm1(log_continue));
  if (splits_on_dim == 0 || dims == 0) {
    throw std::invalid_argument("split prior needs at least one candidate split");
  }
  return log_continue - std::log(static_cast<double>(dims)) -
         std::log(static_cast<double>(splits_on_dim));
}

/// Log priors of every candidate of one node.
struct NodeLogPriors {
  double trivial = 0.0;
  /// Per dimension; unused (NaN) where the dimension has no candidates.
  std::vector<double> split;
};

inline NodeLogPriors node_log_priors(std::size_t depth,
                                     std::span<const std::size_t> splits_per_dim,
                                     const PriorConfig& cfg) {
  cfg.validate();
  NodeLogPriors out;
  const std::size_t d = splits_per_dim.size();
  out.split.assign(d, std::numeric_limits<double>::quiet_NaN());
  if (cfg.kind == PartitionPrior::uniform) {
    const std::size_t space =
        1 + std::accumulate(splits_per_dim.begin(), splits_per_dim.end(), std::size_t{0});
    const double lp = -std::log(static_cast<double>(space));
    out.trivial = lp;
    for (std::size_t r = 0; r < d; ++r) {
      if (splits_per_dim[r] > 0) out.split[r] = lp;
    }
    return out;
  }
  out.trivial = partition_log_prior(PartitionKind::trivial, depth, d, 0, cfg);
  for (std::size_t r = 0; r < d; ++r) {
    if (splits_per_dim[r] > 0) {
      out.split[r] =
          partition_log_prior(PartitionKind::split, depth, d, splits_per_dim[r], cfg);
    }
  }
  return out;
}

/// Maximum-margin threshold between adjacent distinct values lo < hi. When
/// the two are neighbouring doubles the rounded midpoint may equal hi; lo is
/// returned then so that `x <= threshold` still selects exactly the lower side.
inline double split_threshold(double lo, double hi) {
  const double h = std::midpoint(lo, hi);
  return h < hi ? h : lo;
}

/// Number of candidate thresholds along every dimension of `view`.
inline std::vector<std::size_t> count_candidate_splits(const SubsetView& view) {
  std::vector<std::size_t> counts(view.dims(), 0);
  if (view.size() < 2) return counts;
  const DataSet& data = view.data();
  for (std::size_t r = 0; r < view.dims(); ++r) {
    const auto sorted = view.sorted(r);
    const auto col = data.column(r);
    std::size_t n_r = 0;
    for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
      if (col[sorted[j]] != col[sorted[j + 1]]) ++n_r;
    }
    counts[r] = n_r;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// General problem: any outcome model with a marginal likelihood.

/// An outcome model for the general search. `log_marginal` returns
/// ln L(outcomes) with the model parameters integrated out against its prior,
/// and must return 0 for an empty sequence.
template <class M>
concept LikelihoodModel = requires(const M& model, std::span<const Label> outcomes) {
  { model.log_marginal(outcomes) } -> std::convertible_to<double>;
};

/// Categorical outcomes with a Dirichlet prior.
class DirichletMultinomial {
 public:
  explicit DirichletMultinomial(DirichletParams prior) : prior_(std::move(prior)) {}

  const DirichletParams& prior() const { return prior_; }

  double log_marginal(std::span<const Label> outcomes) const {
    return dm_marginal_loglike(count(outcomes), prior_);
  }

  DirichletParams posterior(std::span<const Label> outcomes) const {
    return prior_.updated(count(outcomes));
  }

 private:
  std::vector<std::size_t> count(std::span<const Label> outcomes) const {
    std::vector<std::size_t> counts(prior_.size(), 0);
    for (Label y : outcomes) {
      if (y >= counts.size()) throw std::invalid_argument("outcome label out of range");
      ++counts[y];
    }
    return counts;
  }

  DirichletParams prior_;
};

/// Calls `visit(const PartitionChoice&)` for every candidate of the node in
/// canonical order, evaluating each cell directly with `model`. O(d n^2) for
/// models whose marginal is linear in the cell size.
template <LikelihoodModel Model, class Visit>
void scan_partitions_general(const SubsetView& view, const Model& model,
                             const PriorConfig& cfg, std::size_t depth, Visit&& visit) {
  if (view.empty()) throw std::invalid_argument("partition search on an empty node");
  const std::size_t n = view.size();
  const DataSet& data = view.data();
  const auto splits = count_candidate_splits(view);
  const auto priors = node_log_priors(depth, splits, cfg);

  std::vector<Label> outcomes(n);
  for (std::size_t j = 0; j < n; ++j) outcomes[j] = data.label(view.sorted(0)[j]);
  PartitionChoice trivial;
  trivial.loglike = model.log_marginal(std::span<const Label>(outcomes));
  trivial.logprob = trivial.loglike + priors.trivial;
  visit(std::as_const(trivial));

  for (std::size_t r = 0; r < view.dims(); ++r) {
    if (splits[r] == 0) continue;
    const auto sorted = view.sorted(r);
    const auto col = data.column(r);
    for (std::size_t j = 0; j < n; ++j) outcomes[j] = data.label(sorted[j]);
    const std::span<const Label> all(outcomes);
    std::size_t m = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double lo = col[sorted[j]];
      const double hi = col[sorted[j + 1]];
      if (lo == hi) continue;
      PartitionChoice c;
      c.kind = PartitionKind::split;
      c.dim = r;
      c.index = m++;
      c.threshold = split_threshold(lo, hi);
      c.loglike = model.log_marginal(all.first(j + 1)) + model.log_marginal(all.subspan(j + 1));
      c.logprob = c.loglike + priors.split[r];
      visit(std::as_const(c));
    }
  }
}

// ---------------------------------------------------------------------------
// Classification: Dirichlet-multinomial likelihood, one O(n) sweep per
// dimension.
//
// Moving observations one at a time from the upper to the lower cell, the
// lower cell's log-likelihood gains ln(count_L[y] / (j + p - 1)) before the
// count is incremented, and the upper cell's loses ln(count_U[y] / (m + p))
// after its count is decremented (p = sum of prior pseudo-counts). Summed
// over a cell this telescopes to
//
//   ln L(cell) = sum_c sum_{k < n_c} ln(alpha_c + k) - sum_{k < n} ln(p + k),
//
// so the sweep precomputes the prefix sums of those log terms once per node
// and each candidate's likelihood is a table lookup per class. A candidate's
// value then depends only on its two count vectors, never on the order in
// which rows were moved, which keeps exact ties exact across dimensions.

namespace detail {

struct LogCountTables {
  /// per_class[c][k] = sum_{i < k} ln(alpha_c + i)
  std::vector<std::vector<double>> per_class;
  /// total[k] = sum_{i < k} ln(p + i)
  std::vector<double> total;

  LogCountTables(const DirichletParams& prior, std::span<const std::size_t> counts,
                 std::size_t n) {
    per_class.resize(prior.size());
    for (std::size_t c = 0; c < prior.size(); ++c) {
      auto& t = per_class[c];
      t.resize(counts[c] + 1);
      t[0] = 0.0;
      for (std::size_t k = 1; k <= counts[c]; ++k) {
        t[k] = t[k - 1] + std::log(prior[c] + static_cast<double>(k - 1));
      }
    }
    const double p = prior.sum();
    total.resize(n + 1);
    total[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      total[k] = total[k - 1] + std::log(p + static_cast<double>(k - 1));
    }
  }

  /// Terms are summed in ascending order so that class-permuted counts under
  /// a symmetric prior tie exactly.
  double cell_loglike(std::span<const std::size_t> counts, std::size_t size) const {
    const std::size_t C = counts.size();
    if (C == 2) {
      const double a = per_class[0][counts[0]];
      const double b = per_class[1][counts[1]];
      return std::min(a, b) + std::max(a, b) - total[size];
    }
    terms_.resize(C);
    for (std::size_t c = 0; c < C; ++c) terms_[c] = per_class[c][counts[c]];
    std::sort(terms_.begin(), terms_.end());
    double acc = 0.0;
    for (double t : terms_) acc += t;
    return acc - total[size];
  }

 private:
  mutable std::vector<double> terms_;
};

}  // namespace detail

/// Calls `visit(const PartitionChoice&)` for every candidate of the node in
/// canonical order, using the Dirichlet-multinomial sweep. O(d n + C n).
template <class Visit>
void scan_partitions_classification(const SubsetView& view, const DirichletParams& prior,
                                    const PriorConfig& cfg, std::size_t depth,
                                    Visit&& visit) {
  if (view.empty()) throw std::invalid_argument("partition search on an empty node");
  prior.check_length(view.num_classes());
  const std::size_t n = view.size();
  const std::size_t num_classes = prior.size();
  const DataSet& data = view.data();
  const auto labels = data.labels();

  const auto counts = view.class_counts();
  const detail::LogCountTables tables(prior, counts, n);
  const auto splits = count_candidate_splits(view);
  const auto priors = node_log_priors(depth, splits, cfg);

  PartitionChoice trivial;
  trivial.loglike = tables.cell_loglike(counts, n);
  trivial.logprob = trivial.loglike + priors.trivial;
  visit(std::as_const(trivial));

  std::vector<std::size_t> lower(num_classes);
  std::vector<std::size_t> upper(num_classes);
  for (std::size_t r = 0; r < view.dims(); ++r) {
    if (splits[r] == 0) continue;
    const auto sorted = view.sorted(r);
    const auto col = data.column(r);
    std::fill(lower.begin(), lower.end(), 0);
    std::copy(counts.begin(), counts.end(), upper.begin());
    std::size_t m = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const Label y = labels[sorted[j]];
      ++lower[y];
      --upper[y];
      const double lo = col[sorted[j]];
      const double hi = col[sorted[j + 1]];
      if (lo == hi) continue;
      PartitionChoice c;
      c.kind = PartitionKind::split;
      c.dim = r;
      c.index = m++;
      c.threshold = split_threshold(lo, hi);
      c.loglike = tables.cell_loglike(lower, j + 1) + tables.cell_loglike(upper, n - j - 1);
      c.logprob = c.loglike + priors.split[r];
      visit(std::as_const(c));
    }
  }
}

/// The trivial candidate alone, valued exactly as the sweep values it.
inline PartitionChoice trivial_partition(const SubsetView& view, const DirichletParams& prior,
                                         const PriorConfig& cfg, std::size_t depth) {
  if (view.empty()) throw std::invalid_argument("partition search on an empty node");
  prior.check_length(view.num_classes());
  const auto counts = view.class_counts();
  const detail::LogCountTables tables(prior, counts, view.size());
  const auto splits = count_candidate_splits(view);
  PartitionChoice trivial;
  trivial.loglike = tables.cell_loglike(counts, view.size());
  trivial.logprob = trivial.loglike + node_log_priors(depth, splits, cfg).trivial;
  return trivial;
}

namespace detail {

struct ModalTracker {
  PartitionChoice best;
  bool seen = false;
  void operator()(const PartitionChoice& c) {
    if (!seen || best.logprob < c.logprob) {
      best = c;
      seen = true;
    }
  }
};

struct Collector {
  std::vector<PartitionChoice>* out;
  void operator()(const PartitionChoice& c) const { out->push_back(c); }
};

}  // namespace detail

/// Modal partition for an arbitrary outcome model.
template <LikelihoodModel Model>
PartitionChoice find_modal_partition_general(const SubsetView& view, const Model& model,
                                             const PriorConfig& cfg, std::size_t depth) {
  detail::ModalTracker tracker;
  scan_partitions_general(view, model, cfg, depth, tracker);
  return tracker.best;
}

/// Modal partition for categorical outcomes with a Dirichlet prior.
inline PartitionChoice find_modal_partition_classification(const SubsetView& view,
                                                           const DirichletParams& prior,
                                                           const PriorConfig& cfg,
                                                           std::size_t depth) {
  detail::ModalTracker tracker;
  scan_partitions_classification(view, prior, cfg, depth, tracker);
  return tracker.best;
}

/// Every candidate of the node, in canonical scan order.
inline std::vector<PartitionChoice> enumerate_partitions_classification(
    const SubsetView& view, const DirichletParams& prior, const PriorConfig& cfg,
    std::size_t depth) {
  std::vector<PartitionChoice> out;
  scan_partitions_classification(view, prior, cfg, depth, detail::Collector{&out});
  return out;
}

template <LikelihoodModel Model>
std::vector<PartitionChoice> enumerate_partitions_general(const SubsetView& view,
                                                          const Model& model,
                                                          const PriorConfig& cfg,
                                                          std::size_t depth) {
  std::vector<PartitionChoice> out;
  scan_partitions_general(view, model, cfg, depth, detail::Collector{&out});
  return out;
}

/// ln sum_i exp(v_i) with the max shift.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

/// Posterior mass of the node's partition space aggregated per dimension:
/// entry 0 is the trivial partition, entry 1 + r the sum over all splits
/// along dimension r. Entries sum to one.
inline std::vector<double> dimension_importance(const SubsetView& view,
                                                const DirichletParams& prior,
                                                const PriorConfig& cfg, std::size_t depth) {
  const auto candidates = enumerate_partitions_classification(view, prior, cfg, depth);
  std::vector<double> logprobs;
  logprobs.reserve(candidates.size());
  for (const auto& c : candidates) logprobs.push_back(c.logprob);
  const double norm = log_sum_exp(logprobs);
  std::vector<double> mass(view.dims() + 1, 0.0);
  for (const auto& c : candidates) {
    mass[c.is_split() ? c.dim + 1 : 0] += std::exp(c.logprob - norm);
  }
  return mass;
}

}  // namespace bdt
