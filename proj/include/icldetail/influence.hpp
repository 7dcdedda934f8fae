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

// Influence of in-context demonstrations under the kernel ridge regression a
// transformer is modelled as running over its demonstration embeddings.
//
// With demonstration embeddings M (n × w), one-hot labels Y (n × C) and
// regularizer λ, the ridge weights are
//
//   β = Mᵀ (M Mᵀ + λI)⁻¹ Y                       (dual form, n × n solve)
//
// and the score of demonstration i against an anchor (m_a, y_a) is the
// Frobenius inner product
//
//   s_i = ⟨ g(m_a, y_a), (MᵀM + λI)⁻¹ g(m_i, y_i) ⟩,
//
// where g is the per-example loss gradient w.r.t. β. Leading constants of the
// Hessian are dropped; every consumer of the scores works on ranks.
//
// The anchor is the query in test mode and demonstration i itself in self
// mode (the in-context embedding is reused, no extra forward pass).

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icldetail/error.hpp"
#include "icldetail/linalg.hpp"

namespace icldetail {

enum class ScoreMode { kTest, kSelf };

// Which per-example gradient feeds the score.
//   kDataFit:     mᵀ(mβ − y). First-order estimate of the exact
//                 leave-one-out change of the query loss. Default.
//   kRegularized: mᵀ(mβ − y) + λβ on both sides, the regularizer spread over
//                 every example's loss.
enum class GradientForm { kDataFit, kRegularized };

inline std::string to_string(ScoreMode mode) { return mode == ScoreMode::kTest ? "test" : "self"; }
inline std::string to_string(GradientForm form) {
  return form == GradientForm::kDataFit ? "data_fit" : "regularized";
}

// Task-specific regularizer defaults.
inline constexpr double kDefaultTestLambda = 1.0;
inline constexpr double kDefaultSelfLambda = 1e-9;

struct IclInstance {
  Matrix demo_embeddings;        // n × w
  std::vector<int> demo_labels;  // n entries in [0, num_classes)
  Matrix query_embedding;        // 1 × w, or 0 × w when there is no query
  std::optional<int> query_label;
  int num_classes = 2;

  Eigen::Index size() const { return demo_embeddings.rows(); }
  Eigen::Index width() const { return demo_embeddings.cols(); }
  bool has_query() const { return query_embedding.rows() == 1; }

  // Throws ValidationError on any broken invariant. `allow_empty` admits
  // n = 0, which only the downstream evaluator accepts.
  void validate(bool allow_empty = false) const {
    if (num_classes < 1) {
      throw ValidationError("instance: num_classes must be positive");
    }
    if (!allow_empty && size() < 1) {
      throw ValidationError("instance: at least one demonstration is required");
    }
    if (static_cast<std::size_t>(size()) != demo_labels.size()) {
      throw ValidationError("instance: " + std::to_string(demo_labels.size()) + " labels for " +
                            std::to_string(size()) + " demonstrations");
    }
    for (std::size_t i = 0; i < demo_labels.size(); ++i) {
      if (demo_labels[i] < 0 || demo_labels[i] >= num_classes) {
        throw ValidationError("instance: demo_labels[" + std::to_string(i) + "] = " +
                              std::to_string(demo_labels[i]) + " outside [0, " +
                              std::to_string(num_classes) + ")");
      }
    }
    require_finite(demo_embeddings, "demo_embeddings");
    if (query_embedding.rows() > 1) {
      throw ValidationError("instance: query_embedding must have at most one row");
    }
    if (has_query()) {
      if (query_embedding.cols() != width()) {
        throw ValidationError("instance: query width " + std::to_string(query_embedding.cols()) +
                              " does not match demonstration width " + std::to_string(width()));
      }
      require_finite(query_embedding, "query_embedding");
    }
    if (query_label && (*query_label < 0 || *query_label >= num_classes)) {
      throw ValidationError("instance: query_label " + std::to_string(*query_label) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
};

inline Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

inline Matrix one_hot(int label, int num_classes) { return one_hot(std::vector<int>{label}, num_classes); }

// Ridge weights only, through the n × n dual system.
inline Matrix ridge_weights(const Matrix& demos, const Matrix& targets, double lambda) {
  if (demos.rows() != targets.rows()) {
    throw ValidationError("ridge: " + std::to_string(demos.rows()) + " embeddings but " +
                          std::to_string(targets.rows()) + " target rows");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("ridge: lambda must be finite and non-negative");
  }
  const SpdSolver dual(gram(demos, GramMode::kSample), lambda);
  return demos.transpose() * dual.solve(targets);
}

struct RidgeFit {
  Matrix beta;          // w × C
  double lambda = 0.0;  // as requested; the dual solve may have escalated jitter
  double applied_jitter = 0.0;
  Matrix gram_feature;  // MᵀM, w × w
  Matrix gram_sample;   // MMᵀ, n × n
};

inline RidgeFit fit_ridge(const IclInstance& instance, double lambda) {
  instance.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("fit_ridge: lambda must be finite and non-negative");
  }
  RidgeFit fit;
  fit.lambda = lambda;
  fit.gram_sample = gram(instance.demo_embeddings, GramMode::kSample);
  const SpdSolver dual(fit.gram_sample, lambda);
  fit.applied_jitter = dual.applied_jitter();
  fit.beta = instance.demo_embeddings.transpose() *
             dual.solve(one_hot(instance.demo_labels, instance.num_classes));
  fit.gram_feature = gram(instance.demo_embeddings, GramMode::kFeature);
  return fit;
}

namespace internal {

inline void check_gradient_args(const Matrix& m, const Matrix& y, const RidgeFit& fit) {
  if (m.rows() != 1 || m.cols() != fit.beta.rows()) {
    throw ValidationError("gradient: embedding is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected 1x" +
                          std::to_string(fit.beta.rows()));
  }
  if (y.rows() != 1 || y.cols() != fit.beta.cols()) {
    throw ValidationError("gradient: target is " + std::to_string(y.rows()) + "x" +
                          std::to_string(y.cols()) + ", expected 1x" +
                          std::to_string(fit.beta.cols()));
  }
}

}  // namespace internal

// mᵀ(mβ − y): gradient of the squared error alone (up to the factor 2).
inline Matrix data_fit_gradient(const Matrix& m, const Matrix& y_onehot, const RidgeFit& fit) {
  internal::check_gradient_args(m, y_onehot, fit);
  return m.transpose() * (m * fit.beta - y_onehot);
}

// mᵀ(mβ − y) + λβ: half the gradient of ‖mβ − y‖² + λ‖β‖².
inline Matrix grad_loss(const Matrix& m, const Matrix& y_onehot, const RidgeFit& fit) {
  return data_fit_gradient(m, y_onehot, fit) + fit.lambda * fit.beta;
}

inline Matrix example_gradient(const Matrix& m, const Matrix& y_onehot, const RidgeFit& fit,
                               GradientForm form) {
  return form == GradientForm::kRegularized ? grad_loss(m, y_onehot, fit)
                                            : data_fit_gradient(m, y_onehot, fit);
}

// (MᵀM + λI)⁻¹ g(m_i, y_i). Factorizes per call; InfluenceModel amortizes.
inline Matrix influence_reg(const Matrix& m_i, const Matrix& y_i_onehot, const RidgeFit& fit,
                            GradientForm form = GradientForm::kRegularized) {
  const SpdSolver hessian(fit.gram_feature, fit.lambda);
  return hessian.solve(example_gradient(m_i, y_i_onehot, fit, form));
}

struct ScoreVector {
  std::vector<double> scores;
  ScoreMode mode = ScoreMode::kTest;
  double lambda = 0.0;
  std::optional<std::uint64_t> projection_seed;
  std::optional<Eigen::Index> projection_dim;
  GradientForm gradient = GradientForm::kDataFit;

  std::size_t size() const { return scores.size(); }
};

// Fitted ridge regression plus the per-demonstration parameter influences,
// ready to score any number of anchors. Embeddings are used as given; project
// them first if a projection is wanted.
class InfluenceModel {
 public:
  InfluenceModel(const Matrix& demos, const std::vector<int>& labels, int num_classes,
                 double lambda, GradientForm form = GradientForm::kDataFit)
      : form_(form), num_classes_(num_classes) {
    IclInstance base{demos, labels, Matrix(0, demos.cols()), std::nullopt, num_classes};
    fit_ = fit_ridge(base, lambda);
    demos_ = demos;
    targets_ = one_hot(labels, num_classes);

    const Eigen::Index n = demos.rows();
    const Eigen::Index w = demos.cols();
    const Eigen::Index c = num_classes;
    // Column block i holds g(m_i, y_i), w × C.
    gradients_.resize(w, n * c);
    const Matrix residual = demos * fit_.beta - targets_;  // n × C
    for (Eigen::Index i = 0; i < n; ++i) {
      auto block = gradients_.middleCols(i * c, c);
      block.noalias() = demos.row(i).transpose() * residual.row(i);
      if (form_ == GradientForm::kRegularized) {
        block += fit_.lambda * fit_.beta;
      }
    }
    const SpdSolver hessian(fit_.gram_feature, fit_.lambda);
    influences_ = hessian.solve(gradients_);
  }

  const RidgeFit& fit() const { return fit_; }
  GradientForm gradient_form() const { return form_; }
  Eigen::Index size() const { return demos_.rows(); }

  // ℐ_reg of demonstration i, w × C.
  Matrix influence(Eigen::Index i) const {
    return influences_.middleCols(i * num_classes_, num_classes_);
  }

  // Scores of every demonstration against one anchor example.
  std::vector<double> test_scores(const Matrix& anchor_embedding, int anchor_label) const {
    const Matrix g = example_gradient(anchor_embedding, one_hot(anchor_label, num_classes_), fit_,
                                      form_);
    std::vector<double> scores(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) {
      scores[static_cast<std::size_t>(i)] =
          (g.array() * influences_.middleCols(i * num_classes_, num_classes_).array()).sum();
    }
    return scores;
  }

  // Each demonstration scored against itself.
  std::vector<double> self_scores() const {
    std::vector<double> scores(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) {
      const Matrix g = example_gradient(demos_.row(i), targets_.row(i), fit_, form_);
      scores[static_cast<std::size_t>(i)] =
          (g.array() * influences_.middleCols(i * num_classes_, num_classes_).array()).sum();
    }
    return scores;
  }

 private:
  GradientForm form_;
  int num_classes_;
  RidgeFit fit_;
  Matrix demos_;
  Matrix targets_;
  Matrix gradients_;
  Matrix influences_;
};

// Copy of `instance` with every embedding mapped through `p`.
inline IclInstance project_instance(const IclInstance& instance, const Projection& p) {
  IclInstance out = instance;
  out.demo_embeddings = project(instance.demo_embeddings, p);
  if (instance.has_query()) {
    out.query_embedding = project(instance.query_embedding, p);
  } else {
    out.query_embedding = Matrix(0, p.d_prime);
  }
  return out;
}

// Per-demonstration attribution scores. With a projection the embeddings are
// projected before the ridge fit.
inline ScoreVector detail_scores(const IclInstance& instance, double lambda, ScoreMode mode,
                                 const Projection* projection = nullptr,
                                 GradientForm form = GradientForm::kDataFit) {
  instance.validate();
  if (mode == ScoreMode::kTest) {
    if (!instance.has_query()) {
      throw ValidationError("detail_scores: test mode requires a query_embedding");
    }
    if (!instance.query_label) {
      throw ValidationError("detail_scores: test mode requires a query_label");
    }
  }
  if (projection != nullptr && projection->d != instance.width()) {
    throw ValidationError("detail_scores: projection expects width " +
                          std::to_string(projection->d) + ", instance width is " +
                          std::to_string(instance.width()));
  }
  const IclInstance working =
      projection != nullptr ? project_instance(instance, *projection) : instance;

  const InfluenceModel model(working.demo_embeddings, working.demo_labels, working.num_classes,
                             lambda, form);
  ScoreVector out;
  out.mode = mode;
  out.lambda = lambda;
  out.gradient = form;
  if (projection != nullptr) {
    out.projection_seed = projection->seed;
    out.projection_dim = projection->d_prime;
  }
  out.scores = mode == ScoreMode::kTest
                   ? model.test_scores(working.query_embedding, *working.query_label)
                   : model.self_scores();
  return out;
}

// Squared error of the query under weights `beta`, regularizer excluded.
inline double query_loss(const IclInstance& instance, const Matrix& beta) {
  const Matrix y = one_hot(*instance.query_label, instance.num_classes);
  return (instance.query_embedding * beta - y).squaredNorm();
}

// Exact leave-one-out: entry i is L(query; β without i) − L(query; β).
inline std::vector<double> exact_loo_oracle(const IclInstance& instance, double lambda) {
  instance.validate();
  if (instance.size() < 2) {
    throw ValidationError("exact_loo_oracle: needs at least two demonstrations");
  }
  if (!instance.has_query() || !instance.query_label) {
    throw ValidationError("exact_loo_oracle: requires a labelled query (query_label)");
  }
  const Matrix targets = one_hot(instance.demo_labels, instance.num_classes);
  const double full = query_loss(instance, ridge_weights(instance.demo_embeddings, targets, lambda));

  const Eigen::Index n = instance.size();
  std::vector<double> delta(static_cast<std::size_t>(n));
  Matrix demos(n - 1, instance.width());
  Matrix rest(n - 1, instance.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0, r = 0; j < n; ++j) {
      if (j == i) {
        continue;
      }
      demos.row(r) = instance.demo_embeddings.row(j);
      rest.row(r) = targets.row(j);
      ++r;
    }
    delta[static_cast<std::size_t>(i)] = query_loss(instance, ridge_weights(demos, rest, lambda)) - full;
  }
  return delta;
}

}  // namespace icldetail
