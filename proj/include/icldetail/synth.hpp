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

// Seeded class-clustered ICL instances with optional label corruption.
//
// Instance t is generated from Philox stream (seed, t) alone, so instances can
// be produced independently and in any order. Draw order within an instance:
// class means, demonstrations (label then embedding), query, corrupted
// indices and their new labels, validation anchors.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "icldetail/error.hpp"
#include "icldetail/influence.hpp"
#include "icldetail/linalg.hpp"
#include "icldetail/parallel.hpp"
#include "icldetail/philox.hpp"
#include "icldetail/tasks.hpp"

namespace icldetail {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n = 20;
  Eigen::Index d = 64;
  int num_classes = 2;
  // Noise is N(0, σ²/d · I), so σ is the expected noise norm relative to the
  // unit-norm class means regardless of d.
  double cluster_spread = 0.3;
  std::size_t corrupt_count = 0;
  std::size_t instances = 1;
  std::size_t validation = 0;  // clean anchors per instance, for curation

  void validate() const {
    if (n < 1) {
      throw ValidationError("synth: n must be at least 1");
    }
    if (d < 1) {
      throw ValidationError("synth: d must be at least 1");
    }
    if (num_classes < 2) {
      throw ValidationError("synth: num_classes must be at least 2");
    }
    if (!(cluster_spread > 0.0) || !std::isfinite(cluster_spread)) {
      throw ValidationError("synth: cluster_spread must be positive");
    }
    if (corrupt_count > n) {
      throw ValidationError("synth: corrupt_count " + std::to_string(corrupt_count) +
                            " exceeds n " + std::to_string(n));
    }
  }
};

struct SynthInstance {
  IclInstance instance;
  std::vector<bool> noisy_mask;
  std::vector<int> clean_labels;
  ValidationSet validation;
};

inline SynthInstance gen_instance(const SynthConfig& cfg, std::size_t index) {
  cfg.validate();
  PhiloxStream rng(cfg.seed, index);
  const Eigen::Index d = cfg.d;
  const int c = cfg.num_classes;
  const double noise = cfg.cluster_spread / std::sqrt(static_cast<double>(d));

  Matrix means(c, d);
  for (int k = 0; k < c; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      means(k, j) = rng.next_gaussian();
    }
    const double norm = means.row(k).norm();
    if (norm > 0.0) {
      means.row(k) /= norm;
    }
  }
  auto draw = [&](int label, auto row) {
    for (Eigen::Index j = 0; j < d; ++j) {
      row(j) = means(label, j) + noise * rng.next_gaussian();
    }
  };

  SynthInstance out;
  auto& inst = out.instance;
  inst.num_classes = c;
  const auto n = static_cast<Eigen::Index>(cfg.n);
  inst.demo_embeddings.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(c)));
    inst.demo_labels.push_back(label);
    draw(label, inst.demo_embeddings.row(i));
  }
  const int query_label = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(c)));
  inst.query_label = query_label;
  inst.query_embedding.resize(1, d);
  draw(query_label, inst.query_embedding.row(0));

  out.clean_labels = inst.demo_labels;
  out.noisy_mask.assign(cfg.n, false);
  std::vector<std::size_t> pool(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    pool[i] = i;
  }
  for (std::size_t j = 0; j < cfg.corrupt_count; ++j) {
    const std::size_t pick = j + rng.next_index(cfg.n - j);
    std::swap(pool[j], pool[pick]);
    const std::size_t victim = pool[j];
    const auto shift = 1 + rng.next_index(static_cast<std::uint64_t>(c - 1));
    inst.demo_labels[victim] = static_cast<int>(
        (static_cast<std::uint64_t>(inst.demo_labels[victim]) + shift) % static_cast<std::uint64_t>(c));
    out.noisy_mask[victim] = true;
  }

  const auto v = static_cast<Eigen::Index>(cfg.validation);
  out.validation.embeddings.resize(v, d);
  for (Eigen::Index i = 0; i < v; ++i) {
    const int label = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(c)));
    out.validation.labels.push_back(label);
    draw(label, out.validation.embeddings.row(i));
  }
  return out;
}

inline std::vector<SynthInstance> gen_instances(const SynthConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  std::vector<SynthInstance> out(cfg.instances);
  parallel_for(cfg.instances, jobs, [&](std::size_t t) { out[t] = gen_instance(cfg, t); });
  return out;
}

}  // namespace icldetail
