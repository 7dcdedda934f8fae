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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "icldetail/synth.hpp"
#include "icldetail/tasks.hpp"
#include "oracles.hpp"

namespace {

using icldetail::IclInstance;
using icldetail::Matrix;
using icldetail::ScoreMode;
using icldetail::ScoreVector;

ScoreVector self_scores(std::vector<double> s) {
  ScoreVector v;
  v.scores = std::move(s);
  v.mode = ScoreMode::kSelf;
  return v;
}

TEST(Reorder, TopTwoThenAscending) {
  const auto r = icldetail::reorder(self_scores({5, 1, 3, 2, 4}));
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 4, 1, 3, 2}));
}

TEST(Reorder, Descending) {
  const auto r =
      icldetail::reorder(self_scores({5, 1, 3, 2, 4}), icldetail::ReorderPolicy::kDescending);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 4, 2, 3, 1}));
}

TEST(Reorder, AllEqualKeepsOriginalOrder) {
  const auto r = icldetail::reorder(self_scores(std::vector<double>(6, 1.0)));
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Reorder, RejectsTestModeScores) {
  ScoreVector v = self_scores({1, 2, 3});
  v.mode = ScoreMode::kTest;
  EXPECT_THROW(icldetail::reorder(v), icldetail::ValidationError);
}

TEST(Detect, PerfectRanking) {
  std::vector<double> s(20);
  std::vector<bool> mask(20, false);
  for (std::size_t i = 0; i < 20; ++i) {
    s[i] = static_cast<double>(i);
  }
  for (std::size_t i = 16; i < 20; ++i) {
    mask[i] = true;
  }
  const auto report = icldetail::detect_noisy(self_scores(s), mask);
  ASSERT_EQ(report.fraction_detected_curve.size(), 21u);
  EXPECT_EQ(report.fraction_detected_curve[0], 0.0);
  EXPECT_EQ(report.fraction_detected_curve[2], 0.5);
  EXPECT_EQ(report.fraction_detected_curve[4], 1.0);
  EXPECT_EQ(report.fraction_detected_curve[20], 1.0);
  EXPECT_EQ(report.auc_roc, 1.0);
}

TEST(Detect, AllEqualIsChance) {
  std::vector<bool> mask(20, false);
  mask[0] = mask[5] = mask[9] = mask[11] = true;
  const auto report = icldetail::detect_noisy(self_scores(std::vector<double>(20, 0.25)), mask);
  EXPECT_EQ(report.auc_roc, 0.5);
  EXPECT_EQ(report.fraction_detected_curve.back(), 1.0);
}

TEST(Detect, Errors) {
  EXPECT_THROW(icldetail::detect_noisy(self_scores({1, 2, 3}), {false, false, false}),
               icldetail::ValidationError);
  EXPECT_THROW(icldetail::detect_noisy(self_scores({1, 2, 3}), {true, false}),
               icldetail::ValidationError);
}

TEST(Detect, ShuffledControlIsSeeded) {
  std::vector<double> s(20);
  std::vector<bool> mask(20, false);
  for (std::size_t i = 0; i < 20; ++i) {
    s[i] = static_cast<double>(i);
    mask[i] = i >= 16;
  }
  const auto a = icldetail::label_shuffled_auc(self_scores(s), mask, 3, 0);
  EXPECT_EQ(a, icldetail::label_shuffled_auc(self_scores(s), mask, 3, 0));
  EXPECT_LT(a, 1.0);
}

IclInstance small_instance() {
  IclInstance inst;
  inst.num_classes = 2;
  inst.demo_embeddings = Matrix(4, 2);
  inst.demo_embeddings << 1, 0, 0, 1, 2, 0, 0, 3;
  inst.demo_labels = {0, 1, 0, 1};
  inst.query_embedding = Matrix(1, 2);
  inst.query_embedding << 1, 0.1;
  inst.query_label = 0;
  return inst;
}

TEST(RemoveDemonstrations, KeepsRelativeOrder) {
  const auto inst = small_instance();
  const std::vector<std::size_t> drop = {2, 0};
  const auto out = icldetail::remove_demonstrations(inst, drop);
  ASSERT_EQ(out.size(), 2);
  EXPECT_EQ(out.demo_labels, (std::vector<int>{1, 1}));
  EXPECT_EQ(out.demo_embeddings(1, 1), 3.0);
  EXPECT_EQ(out.query_embedding, inst.query_embedding);
}

TEST(PredictClass, SingleMatchingDemo) {
  IclInstance inst;
  inst.num_classes = 3;
  inst.demo_embeddings = Matrix(1, 3);
  inst.demo_embeddings << 0.3, -1.0, 2.0;
  inst.demo_labels = {2};
  inst.query_embedding = inst.demo_embeddings;
  EXPECT_EQ(icldetail::predict_class(inst, 1e-6), 2);
}

TEST(PredictClass, EquidistantQueryTiesToClassZero) {
  IclInstance inst;
  inst.num_classes = 2;
  inst.demo_embeddings = Matrix(2, 2);
  inst.demo_embeddings << 1, 0, 0, 1;
  inst.demo_labels = {0, 1};
  inst.query_embedding = Matrix(1, 2);
  inst.query_embedding << 1, 1;
  EXPECT_EQ(icldetail::predict_class(inst, 1.0), 0);
  inst.demo_labels = {1, 0};
  EXPECT_EQ(icldetail::predict_class(inst, 1.0), 0);
}

TEST(PredictClass, EmptyFallsBackToClassZero) {
  auto inst = small_instance();
  const std::vector<std::size_t> all = {0, 1, 2, 3};
  EXPECT_EQ(icldetail::predict_class(icldetail::remove_demonstrations(inst, all), 1.0), 0);
}

TEST(PredictClass, AgreesWithIndependentClassifier) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = oracle::random_instance(rng, 10, 6 + trial % 20, 3);
    EXPECT_EQ(icldetail::predict_class(inst, 0.5), oracle::ridge_predict(inst, 0.5)) << trial;
  }
}

TEST(Curate, SingleAnchorEqualsTestScores) {
  std::mt19937_64 rng(3);
  auto inst = oracle::random_instance(rng, 8, 5, 2);
  icldetail::ValidationSet v{inst.query_embedding, {*inst.query_label}};
  const auto plan = icldetail::curate(inst, v, 1.0, 3);
  const auto scores = icldetail::detail_scores(inst, 1.0, ScoreMode::kTest).scores;
  EXPECT_EQ(plan.summed_scores, scores);
  EXPECT_EQ(plan.removal_order,
            icldetail::stable_argsort(scores, icldetail::Direction::kAscending));
  EXPECT_EQ(plan.removed().size(), 3u);
  EXPECT_EQ(plan.kept().size(), 5u);
}

TEST(Curate, SumsOverAnchors) {
  std::mt19937_64 rng(4);
  const auto inst = oracle::random_instance(rng, 6, 4, 2);
  icldetail::ValidationSet v{oracle::random_matrix(rng, 3, 4), {0, 1, 1}};
  const auto plan = icldetail::curate(inst, v, 0.5, 0);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(plan.summed_scores[i], plan.scores_per_validation.row(static_cast<Eigen::Index>(i)).sum(),
                1e-12);
  }
}

TEST(Curate, ZeroRemovalKeepsEverything) {
  std::mt19937_64 rng(5);
  const auto inst = oracle::random_instance(rng, 6, 4, 2);
  icldetail::ValidationSet v{oracle::random_matrix(rng, 2, 4), {0, 1}};
  const auto plan = icldetail::curate(inst, v, 1.0, 0);
  EXPECT_TRUE(plan.removed().empty());
  EXPECT_EQ(plan.kept(), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  const auto same = plan.apply(inst);
  EXPECT_EQ(same.demo_embeddings, inst.demo_embeddings);
}

TEST(Curate, Errors) {
  std::mt19937_64 rng(5);
  const auto inst = oracle::random_instance(rng, 6, 4, 2);
  icldetail::ValidationSet empty{Matrix(0, 4), {}};
  EXPECT_THROW(icldetail::curate(inst, empty, 1.0, 1), icldetail::ValidationError);
  icldetail::ValidationSet v{oracle::random_matrix(rng, 1, 4), {1}};
  EXPECT_THROW(icldetail::curate(inst, v, 1.0, 7), icldetail::ValidationError);
}

// Accuracy of the ridge classifier after removing the k lowest / highest
// summed-validation-score demonstrations.
TEST(Curate, SyntheticRemovalDirection) {
  icldetail::SynthConfig cfg;
  cfg.seed = 11;
  cfg.n = 20;
  cfg.d = 64;
  cfg.num_classes = 2;
  cfg.cluster_spread = 0.3;
  cfg.corrupt_count = 5;
  cfg.instances = 100;
  cfg.validation = 10;
  const auto data = icldetail::gen_instances(cfg);
  double full = 0.0;
  double low = 0.0;
  double high = 0.0;
  for (const auto& s : data) {
    const auto plan = icldetail::curate(s.instance, s.validation, 1.0, 10);
    const std::span<const std::size_t> order(plan.removal_order);
    const int y = *s.instance.query_label;
    full += icldetail::predict_class(s.instance, 1.0) == y;
    low += icldetail::predict_class(icldetail::remove_demonstrations(s.instance, order.first(10)),
                                    1.0) == y;
    high += icldetail::predict_class(icldetail::remove_demonstrations(s.instance, order.last(10)),
                                     1.0) == y;
  }
  full /= 100.0;
  low /= 100.0;
  high /= 100.0;
  EXPECT_GE(low, full - 0.05);
  EXPECT_GE(full - high, 0.15);
}

std::vector<IclInstance> synthetic_dataset(std::size_t count, std::size_t corrupt) {
  icldetail::SynthConfig cfg;
  cfg.seed = 21;
  cfg.instances = count;
  cfg.corrupt_count = corrupt;
  std::vector<IclInstance> out;
  for (const auto& s : icldetail::gen_instances(cfg)) {
    out.push_back(s.instance);
  }
  return out;
}

TEST(Perturb, StepZeroIsUnperturbedForEveryOrdering) {
  const auto data = synthetic_dataset(30, 4);
  double base = -1.0;
  for (auto which : {icldetail::PerturbWhich::kHigh, icldetail::PerturbWhich::kLow,
                     icldetail::PerturbWhich::kRandom}) {
    icldetail::PerturbConfig cfg;
    cfg.which = which;
    cfg.k = 0;
    const auto r = icldetail::perturb_experiment(data, cfg);
    ASSERT_EQ(r.accuracy.size(), 1u);
    if (base < 0.0) {
      base = r.accuracy[0].mean;
    }
    EXPECT_EQ(r.accuracy[0].mean, base);
  }
}

TEST(Perturb, RemovingEverythingIsChance) {
  const auto data = synthetic_dataset(400, 0);
  icldetail::PerturbConfig cfg;
  cfg.k = 20;
  const auto r = icldetail::perturb_experiment(data, cfg);
  // only class 0 remains reachable, so accuracy is the share of class-0 queries
  EXPECT_NEAR(r.accuracy.back().mean, 0.5, 0.1);
}

TEST(Perturb, CorruptionMovesLabelsOffTheirClass) {
  const auto data = synthetic_dataset(10, 0);
  icldetail::PerturbConfig cfg;
  cfg.mode = icldetail::PerturbMode::kCorrupt;
  cfg.which = icldetail::PerturbWhich::kRandom;
  cfg.k = 5;
  cfg.seed = 4;
  const auto r = icldetail::perturb_experiment(data, cfg);
  for (std::size_t t = 0; t < data.size(); ++t) {
    ASSERT_EQ(r.order[t].size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_NE(r.corrupted_to[t][j], data[t].demo_labels[r.order[t][j]]);
    }
  }
}

TEST(Perturb, ParallelMatchesSerial) {
  const auto data = synthetic_dataset(20, 4);
  icldetail::PerturbConfig cfg;
  cfg.which = icldetail::PerturbWhich::kRandom;
  cfg.k = 6;
  cfg.seed = 9;
  const auto a = icldetail::perturb_experiment(data, cfg);
  cfg.jobs = 4;
  const auto b = icldetail::perturb_experiment(data, cfg);
  EXPECT_EQ(a.order, b.order);
  EXPECT_EQ(a.correct, b.correct);
}

TEST(Perturb, ExternalPredictorIsUsed) {
  const auto data = synthetic_dataset(5, 0);
  icldetail::PerturbConfig cfg;
  cfg.k = 2;
  std::vector<std::size_t> calls;
  const auto r = icldetail::perturb_experiment(
      data, cfg, [&](const IclInstance& inst, std::size_t, std::size_t step) {
        calls.push_back(step);
        EXPECT_EQ(static_cast<std::size_t>(inst.size()), 20 - step);
        return -1;
      });
  EXPECT_EQ(calls.size(), 15u);
  EXPECT_EQ(r.accuracy[1].mean, 0.0);
}

TEST(Perturb, RequiresLabelledQuery) {
  auto data = synthetic_dataset(2, 0);
  data[1].query_label.reset();
  icldetail::PerturbConfig cfg;
  EXPECT_THROW(icldetail::perturb_experiment(data, cfg), icldetail::ValidationError);
}

}  // namespace
