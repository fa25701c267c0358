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

// Shuffled k-fold assignment.
//
// The shuffle is reproducible across platforms and standard libraries:
//  1. generator: std::mt19937_64 seeded with `seed` (its output sequence is
//     fixed by the C++ standard);
//  2. bounded draws: uniform integer in [0, bound) by rejection, discarding
//     raw outputs below (2^64 - bound) mod bound, then taking raw % bound;
//  3. permutation: Fisher-Yates over positions 0..n-1, for i = n-1 down to 1
//     swap(p[i], p[draw(i + 1)]).
// Row p[j] is assigned to fold j mod k, so fold sizes differ by at most one.

#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdt {

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  /// Fold label of every row.
  std::vector<std::size_t> assignment;

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (auto f : assignment) ++sizes[f];
    return sizes;
  }
};

namespace detail {

inline std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace detail

/// Permutation of 0..n-1 as described at the top of this file.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i-- > 1;) {
    std::swap(p[i], p[detail::bounded_draw(gen, i + 1)]);
  }
  return p;
}

inline FoldPlan kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: need k >= 2, got " + std::to_string(k));
  if (k > n) {
    throw std::invalid_argument("kfold: k = " + std::to_string(k) +
                                " exceeds row count " + std::to_string(n));
  }
  FoldPlan plan{k, seed, std::vector<std::size_t>(n)};
  const auto order = shuffled_indices(n, seed);
  for (std::size_t j = 0; j < n; ++j) plan.assignment[order[j]] = j % k;
  return plan;
}

/// One fold label per line, for audit.
inline void write_fold_plan(std::ostream& out, const FoldPlan& plan) {
  for (auto f : plan.assignment) out << f << '\n';
}

}  // namespace bdt
