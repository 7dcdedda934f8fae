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

// Applications of demonstration scores: noisy-label detection, prompt
// reordering, curation by summed validation influence, and perturbation
// experiments evaluated with the ridge classifier itself.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "icldetail/error.hpp"
#include "icldetail/influence.hpp"
#include "icldetail/linalg.hpp"
#include "icldetail/metrics.hpp"
#include "icldetail/parallel.hpp"
#include "icldetail/philox.hpp"

namespace icldetail {

struct Ranking {
  std::vector<std::size_t> order;
  ScoreMode basis = ScoreMode::kSelf;
  Direction direction = Direction::kDescending;
};

struct DetectionReport {
  Ranking ranking;
  // curve[k] = fraction of noisy items among the first k checked, k = 0..n.
  std::vector<double> fraction_detected_curve;
  double auc_roc = 0.5;
  std::vector<bool> noisy_mask;
};

inline void require_mode(const ScoreVector& scores, ScoreMode mode, const char* op) {
  if (scores.mode != mode) {
    throw ValidationError(std::string(op) + ": expected " + to_string(mode) +
                          "-mode scores, got " + to_string(scores.mode));
  }
}

// Checks items in descending self-influence order.
inline DetectionReport detect_noisy(const ScoreVector& scores, const std::vector<bool>& noisy_mask) {
  require_mode(scores, ScoreMode::kSelf, "detect_noisy");
  if (noisy_mask.size() != scores.size()) {
    throw ValidationError("detect_noisy: noisy_mask has " + std::to_string(noisy_mask.size()) +
                          " entries for " + std::to_string(scores.size()) + " scores");
  }
  const auto noisy_total =
      static_cast<std::size_t>(std::count(noisy_mask.begin(), noisy_mask.end(), true));
  if (noisy_total == 0) {
    throw ValidationError("detect_noisy: no noisy demonstrations, AUC is undefined");
  }
  DetectionReport report;
  report.noisy_mask = noisy_mask;
  report.ranking = {stable_argsort(scores.scores, Direction::kDescending), ScoreMode::kSelf,
                    Direction::kDescending};
  report.fraction_detected_curve.assign(scores.size() + 1, 0.0);
  std::size_t found = 0;
  for (std::size_t k = 0; k < report.ranking.order.size(); ++k) {
    if (noisy_mask[report.ranking.order[k]]) {
      ++found;
    }
    report.fraction_detected_curve[k + 1] =
        static_cast<double>(found) / static_cast<double>(noisy_total);
  }
  report.auc_roc = auc_roc(scores.scores, noisy_mask);
  return report;
}

inline constexpr std::uint64_t kControlStreamBase = 0x43544C00ULL << 32;

// Control: AUC of the same scores against a seeded permutation of the mask.
inline double label_shuffled_auc(const ScoreVector& scores, const std::vector<bool>& noisy_mask,
                                 std::uint64_t seed, std::size_t instance) {
  std::vector<bool> shuffled = noisy_mask;
  PhiloxStream rng(seed, kControlStreamBase + instance);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_index(i));
    const bool tmp = shuffled[i - 1];
    shuffled[i - 1] = shuffled[j];
    shuffled[j] = tmp;
  }
  return auc_roc(scores.scores, shuffled);
}

enum class ReorderPolicy {
  // Two highest scores first (larger first), then the rest ascending.
  kTop2FrontThenAscending,
  kDescending,
};

inline std::string to_string(ReorderPolicy policy) {
  return policy == ReorderPolicy::kDescending ? "descending" : "top2_front_then_ascending";
}

inline Ranking reorder(const ScoreVector& scores,
                       ReorderPolicy policy = ReorderPolicy::kTop2FrontThenAscending) {
  require_mode(scores, ScoreMode::kSelf, "reorder");
  if (policy == ReorderPolicy::kDescending) {
    return {stable_argsort(scores.scores, Direction::kDescending), ScoreMode::kSelf,
            Direction::kDescending};
  }
  if (scores.size() < 2) {
    throw ValidationError("reorder: top2_front_then_ascending needs at least two demonstrations");
  }
  const auto desc = stable_argsort(scores.scores, Direction::kDescending);
  std::vector<std::size_t> order{desc[0], desc[1]};
  for (std::size_t i : stable_argsort(scores.scores, Direction::kAscending)) {
    if (i != desc[0] && i != desc[1]) {
      order.push_back(i);
    }
  }
  return {std::move(order), ScoreMode::kSelf, Direction::kAscending};
}

// Demonstrations `remove` dropped, survivors in their original order.
inline IclInstance remove_demonstrations(const IclInstance& instance,
                                         std::span<const std::size_t> remove) {
  std::vector<bool> drop(static_cast<std::size_t>(instance.size()), false);
  for (std::size_t i : remove) {
    if (i >= drop.size()) {
      throw ValidationError("remove_demonstrations: index " + std::to_string(i) +
                            " out of range");
    }
    drop[i] = true;
  }
  const auto kept = static_cast<Eigen::Index>(std::count(drop.begin(), drop.end(), false));
  IclInstance out;
  out.demo_embeddings.resize(kept, instance.width());
  out.query_embedding = instance.query_embedding;
  out.query_label = instance.query_label;
  out.num_classes = instance.num_classes;
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < drop.size(); ++i) {
    if (!drop[i]) {
      out.demo_embeddings.row(r++) = instance.demo_embeddings.row(static_cast<Eigen::Index>(i));
      out.demo_labels.push_back(instance.demo_labels[i]);
    }
  }
  return out;
}

// The ridge classifier as downstream model: argmax_c (m_query β)_c, ties to
// the lowest class. With no demonstrations every class scores 0, which
// yields class 0 (the uniform prior resolved by the same tie rule).
inline int predict_class(const IclInstance& instance, double lambda) {
  instance.validate(/*allow_empty=*/true);
  if (!instance.has_query()) {
    throw ValidationError("predict_class: instance has no query_embedding");
  }
  if (instance.size() == 0) {
    return 0;
  }
  const Matrix beta =
      ridge_weights(instance.demo_embeddings, one_hot(instance.demo_labels, instance.num_classes),
                    lambda);
  const Matrix logits = instance.query_embedding * beta;
  int best = 0;
  for (int c = 1; c < instance.num_classes; ++c) {
    if (logits(0, c) > logits(0, best)) {
      best = c;
    }
  }
  return best;
}

struct ValidationSet {
  Matrix embeddings;        // v × w
  std::vector<int> labels;  // v
};

struct CurationPlan {
  std::vector<std::size_t> removal_order;  // ascending summed score
  Matrix scores_per_validation;            // n × v
  std::vector<double> summed_scores;       // n
  std::size_t k = 0;

  std::span<const std::size_t> removed() const {
    return std::span<const std::size_t>(removal_order).first(k);
  }

  // Surviving indices in original order.
  std::vector<std::size_t> kept() const {
    std::vector<std::size_t> out(removal_order.begin() + static_cast<std::ptrdiff_t>(k),
                                 removal_order.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  IclInstance apply(const IclInstance& instance) const { return remove_demonstrations(instance, removed()); }
};

// Sums test-mode scores over every validation anchor and plans removal of the
// k lowest. Any query in `base` is ignored.
inline CurationPlan curate(const IclInstance& base, const ValidationSet& validation, double lambda,
                           std::size_t k, const Projection* projection = nullptr,
                           GradientForm form = GradientForm::kDataFit) {
  base.validate();
  if (validation.embeddings.rows() == 0) {
    throw ValidationError("curate: validation set is empty");
  }
  if (static_cast<std::size_t>(validation.embeddings.rows()) != validation.labels.size()) {
    throw ValidationError("curate: validation labels do not match validation embeddings");
  }
  if (validation.embeddings.cols() != base.width()) {
    throw ValidationError("curate: validation width " + std::to_string(validation.embeddings.cols()) +
                          " does not match demonstration width " + std::to_string(base.width()));
  }
  require_finite(validation.embeddings, "validation embeddings");
  const auto n = static_cast<std::size_t>(base.size());
  if (k > n) {
    throw ValidationError("curate: k = " + std::to_string(k) + " exceeds " + std::to_string(n) +
                          " demonstrations");
  }
  for (int label : validation.labels) {
    if (label < 0 || label >= base.num_classes) {
      throw ValidationError("curate: validation label " + std::to_string(label) + " out of range");
    }
  }
  if (projection != nullptr && projection->d != base.width()) {
    throw ValidationError("curate: projection width mismatch");
  }

  const Matrix demos =
      projection != nullptr ? project(base.demo_embeddings, *projection) : base.demo_embeddings;
  const Matrix anchors =
      projection != nullptr ? project(validation.embeddings, *projection) : validation.embeddings;
  const InfluenceModel model(demos, base.demo_labels, base.num_classes, lambda, form);

  CurationPlan plan;
  plan.k = k;
  plan.scores_per_validation.resize(static_cast<Eigen::Index>(n), anchors.rows());
  plan.summed_scores.assign(n, 0.0);
  for (Eigen::Index v = 0; v < anchors.rows(); ++v) {
    const auto s = model.test_scores(anchors.row(v), validation.labels[static_cast<std::size_t>(v)]);
    for (std::size_t i = 0; i < n; ++i) {
      plan.scores_per_validation(static_cast<Eigen::Index>(i), v) = s[i];
      plan.summed_scores[i] += s[i];
    }
  }
  plan.removal_order = stable_argsort(plan.summed_scores, Direction::kAscending);
  return plan;
}

enum class PerturbMode { kRemove, kCorrupt };
enum class PerturbWhich { kHigh, kLow, kRandom };

inline std::string to_string(PerturbMode mode) {
  return mode == PerturbMode::kRemove ? "remove" : "corrupt";
}
inline std::string to_string(PerturbWhich which) {
  switch (which) {
    case PerturbWhich::kHigh:
      return "high";
    case PerturbWhich::kLow:
      return "low";
    case PerturbWhich::kRandom:
      return "random";
  }
  return "unknown";
}

struct PerturbConfig {
  PerturbMode mode = PerturbMode::kRemove;
  PerturbWhich which = PerturbWhich::kHigh;
  std::size_t k = 0;
  double lambda = kDefaultTestLambda;
  std::optional<double> eval_lambda;  // evaluator regularizer, defaults to lambda
  std::uint64_t seed = 0;
  const Projection* projection = nullptr;
  GradientForm gradient = GradientForm::kDataFit;
  std::size_t jobs = 1;
};

// Called as predictor(perturbed, instance_index, step); returns a class.
using Predictor = std::function<int(const IclInstance&, std::size_t, std::size_t)>;

struct PerturbResult {
  std::vector<MeanStderr> accuracy;             // steps 0..k
  std::vector<std::vector<std::size_t>> order;  // per instance: perturbation order
  std::vector<std::vector<int>> corrupted_to;   // per instance, corrupt mode: new label per order slot
  std::vector<std::vector<bool>> correct;       // per instance, per step
};

// Philox stream ids for the two independent random draws of an instance.
inline std::uint64_t perturb_order_stream(std::size_t instance) { return 2 * std::uint64_t{instance}; }
inline std::uint64_t perturb_label_stream(std::size_t instance) {
  return 2 * std::uint64_t{instance} + 1;
}

// Perturbs the first s demonstrations of each instance's order for
// s = 0..k and records whether the query is still classified correctly.
// Order: descending test score (high), ascending (low), or a seeded shuffle
// (random). Corruption moves a label uniformly to one of the other classes.
inline PerturbResult perturb_experiment(std::span<const IclInstance> dataset,
                                        const PerturbConfig& cfg,
                                        const Predictor& predictor = {}) {
  if (dataset.empty()) {
    throw ValidationError("perturb_experiment: empty dataset");
  }
  const double eval_lambda = cfg.eval_lambda.value_or(cfg.lambda);
  for (std::size_t t = 0; t < dataset.size(); ++t) {
    const auto& inst = dataset[t];
    inst.validate();
    if (!inst.has_query() || !inst.query_label) {
      throw ValidationError("perturb_experiment: instance " + std::to_string(t) +
                            " lacks a labelled query (query_label)");
    }
    if (cfg.k > static_cast<std::size_t>(inst.size())) {
      throw ValidationError("perturb_experiment: k = " + std::to_string(cfg.k) + " exceeds n = " +
                            std::to_string(inst.size()) + " in instance " + std::to_string(t));
    }
    if (cfg.mode == PerturbMode::kCorrupt && inst.num_classes < 2) {
      throw ValidationError("perturb_experiment: corrupt mode needs at least two classes");
    }
  }

  PerturbResult result;
  result.order.resize(dataset.size());
  result.corrupted_to.resize(dataset.size());
  result.correct.resize(dataset.size());

  parallel_for(dataset.size(), cfg.jobs, [&](std::size_t t) {
    const IclInstance& inst = dataset[t];
    const auto n = static_cast<std::size_t>(inst.size());
    std::vector<std::size_t> order;
    if (cfg.which == PerturbWhich::kRandom) {
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      PhiloxStream rng(cfg.seed, perturb_order_stream(t));
      for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.next_index(i)]);
      }
    } else {
      const ScoreVector s = detail_scores(inst, cfg.lambda, ScoreMode::kTest, cfg.projection,
                                          cfg.gradient);
      order = stable_argsort(s.scores, cfg.which == PerturbWhich::kHigh ? Direction::kDescending
                                                                        : Direction::kAscending);
    }
    order.resize(cfg.k);

    std::vector<int> new_labels;
    if (cfg.mode == PerturbMode::kCorrupt) {
      PhiloxStream rng(cfg.seed, perturb_label_stream(t));
      for (std::size_t idx : order) {
        const auto shift = 1 + rng.next_index(static_cast<std::uint64_t>(inst.num_classes - 1));
        new_labels.push_back(
            static_cast<int>((static_cast<std::uint64_t>(inst.demo_labels[idx]) + shift) %
                             static_cast<std::uint64_t>(inst.num_classes)));
      }
    }

    std::vector<bool> correct(cfg.k + 1);
    for (std::size_t step = 0; step <= cfg.k; ++step) {
      IclInstance perturbed;
      if (cfg.mode == PerturbMode::kRemove) {
        perturbed = remove_demonstrations(inst, std::span<const std::size_t>(order).first(step));
      } else {
        perturbed = inst;
        for (std::size_t j = 0; j < step; ++j) {
          perturbed.demo_labels[order[j]] = new_labels[j];
        }
      }
      const int predicted = predictor ? predictor(perturbed, t, step)
                                      : predict_class(perturbed, eval_lambda);
      correct[step] = predicted == *inst.query_label;
    }
    result.order[t] = std::move(order);
    result.corrupted_to[t] = std::move(new_labels);
    result.correct[t] = std::move(correct);
  });

  result.accuracy.resize(cfg.k + 1);
  std::vector<double> column(dataset.size());
  for (std::size_t step = 0; step <= cfg.k; ++step) {
    for (std::size_t t = 0; t < dataset.size(); ++t) {
      column[t] = result.correct[t][step] ? 1.0 : 0.0;
    }
    result.accuracy[step] = mean_stderr(column);
  }
  return result;
}

}  // namespace icldetail
