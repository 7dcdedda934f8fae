// Copyright 2026 The icldetail Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Ranking utilities shared by the attribution tasks: stable argsorts,
// tie-averaged ranks, Spearman correlation and rank-sum AUC.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "icldetail/error.hpp"

namespace icldetail {

enum class Direction { kAscending, kDescending };

// Indices ordered by score; equal scores keep ascending index order.
inline std::vector<std::size_t> stable_argsort(std::span<const double> scores,
                                               Direction direction) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (direction == Direction::kAscending) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  }
  return order;
}

// Position of each index in the descending order (0 = highest score).
inline std::vector<std::size_t> descending_ranks(std::span<const double> scores) {
  const auto order = stable_argsort(scores, Direction::kDescending);
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rank[order[pos]] = pos;
  }
  return rank;
}

// 1-based ascending ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const auto order = stable_argsort(values, Direction::kAscending);
  std::vector<double> rank(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) {
      ++j;
    }
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      rank[order[k]] = mean_rank;
    }
    i = j;
  }
  return rank;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("pearson: need two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    return 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

// Spearman's rho: Pearson correlation of tie-averaged ranks. Returns 0 when
// either sample is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

// Probability that a random positive outscores a random negative, ties
// counted as 1/2 (Mann-Whitney U / (n_pos · n_neg)).
inline double auc_roc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (positive.size() != scores.size()) {
    throw ValidationError("auc_roc: mask length " + std::to_string(positive.size()) +
                          " does not match score count " + std::to_string(scores.size()));
  }
  const auto n_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  const std::size_t n_neg = positive.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("auc_roc: undefined without both positive and negative items");
  }
  const auto rank = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < rank.size(); ++i) {
    if (positive[i]) {
      rank_sum += rank[i];
    }
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline double median(std::vector<double> values) {
  if (values.empty()) {
    throw ValidationError("median of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean and standard error (n-1 denominator; 0 for a single value).
inline MeanStderr mean_stderr(std::span<const double> values) {
  if (values.empty()) {
    throw ValidationError("mean of an empty sample");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace icldetail
