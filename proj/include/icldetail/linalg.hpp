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

// Dense linear algebra used by the influence computations: Gram matrices,
// Cholesky-based SPD solves with one-shot jitter escalation, and seeded
// Gaussian random projections.
//
// Everything here is a pure function of its arguments.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "icldetail/error.hpp"
#include "icldetail/philox.hpp"

namespace icldetail {

// Row-major, 64-bit. Rows are samples (demonstrations), columns are features.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + " contains non-finite entries");
  }
}

enum class GramMode {
  kFeature,  // MᵀM, cols × cols
  kSample,   // MMᵀ, rows × rows
};

// Gram matrix of `m`. The result is exactly symmetric: only the lower
// triangle is accumulated and then mirrored.
inline Matrix gram(const Matrix& m, GramMode mode) {
  require_finite(m, "gram input");
  const Eigen::Index k = mode == GramMode::kFeature ? m.cols() : m.rows();
  constexpr auto kMaxEntries =
      static_cast<double>(std::numeric_limits<Eigen::Index>::max()) / sizeof(double);
  if (static_cast<double>(k) * static_cast<double>(k) > kMaxEntries) {
    throw ValidationError("gram: result dimension " + std::to_string(k) + " overflows");
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
  if (mode == GramMode::kFeature) {
    g.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
  } else {
    g.selfadjointView<Eigen::Lower>().rankUpdate(m);
  }
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

// Factorization of A + jitter·I, reusable across right-hand sides.
//
// If the Cholesky factorization fails at the requested jitter it is retried
// once with jitter + 1e-10·trace(A)/n. A second failure is a NumericalError
// naming both attempts.
class SpdSolver {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;
  static constexpr double kEscalationFactor = 1e-10;

  SpdSolver(const Matrix& a, double jitter) {
    if (a.rows() != a.cols()) {
      throw ValidationError("solve_spd: matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", expected square");
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
      throw ValidationError("solve_spd: jitter must be finite and non-negative");
    }
    require_finite(a, "solve_spd matrix");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = a.rows() == 0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      std::ostringstream msg;
      msg << "solve_spd: matrix asymmetry " << asym << " exceeds tolerance";
      throw ValidationError(msg.str());
    }

    const Eigen::Index n = a.rows();
    if (try_factor(a, jitter)) {
      return;
    }
    const double escalated =
        jitter + kEscalationFactor * a.trace() / static_cast<double>(std::max<Eigen::Index>(n, 1));
    if (try_factor(a, escalated)) {
      escalated_ = true;
      return;
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "solve_spd: Cholesky factorization failed at jitter " << jitter
        << " and at escalated jitter " << escalated;
    throw NumericalError(msg.str());
  }

  Eigen::Index size() const { return llt_.rows(); }
  double applied_jitter() const { return jitter_; }
  bool escalated() const { return escalated_; }

  Matrix solve(const Matrix& b) const {
    if (b.rows() != llt_.rows()) {
      throw ValidationError("solve_spd: right-hand side has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(llt_.rows()));
    }
    Eigen::MatrixXd x = llt_.solve(Eigen::MatrixXd(b));
    return x;
  }

 private:
  bool try_factor(const Matrix& a, double jitter) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt_.compute(shifted);
    jitter_ = jitter;
    return llt_.info() == Eigen::Success;
  }

  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
  bool escalated_ = false;
};

// Solves (A + jitter·I) X = B.
inline Matrix solve_spd(const Matrix& a, const Matrix& b, double jitter) {
  return SpdSolver(a, jitter).solve(b);
}

// Gaussian projection d → d_prime, entries N(0, 1/d_prime).
struct Projection {
  std::uint64_t seed = 0;
  Eigen::Index d = 0;
  Eigen::Index d_prime = 0;
  Matrix entries;  // d × d_prime
};

// Philox stream id reserved for projection matrices ("PROJ").
inline constexpr std::uint64_t kProjectionStream = 0x50524F4Au;

// Entry (r, c) is normal number r·d_prime + c of the (seed, kProjectionStream)
// Philox stream, scaled by 1/sqrt(d_prime).
inline Projection make_projection(std::uint64_t seed, Eigen::Index d, Eigen::Index d_prime) {
  if (d_prime < 1) {
    throw ValidationError("make_projection: d_prime must be at least 1");
  }
  if (d_prime > d) {
    throw ValidationError("make_projection: d_prime " + std::to_string(d_prime) +
                          " exceeds source dimension " + std::to_string(d));
  }
  Projection p{seed, d, d_prime, Matrix(d, d_prime)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_prime));
  const PhiloxKey key = philox_key(seed);
  double* out = p.entries.data();
  const auto total = static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d_prime);
  for (std::uint64_t block = 0; 2 * block < total; ++block) {
    const PhiloxCounter r = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(kProjectionStream),
         static_cast<std::uint32_t>(kProjectionStream >> 32)},
        key);
    const auto [g0, g1] = gaussian_pair((std::uint64_t{r[1]} << 32) | r[0],
                                        (std::uint64_t{r[3]} << 32) | r[2]);
    out[2 * block] = g0 * scale;
    if (2 * block + 1 < total) {
      out[2 * block + 1] = g1 * scale;
    }
  }
  return p;
}

inline Matrix project(const Matrix& m, const Projection& p) {
  if (m.cols() != p.d) {
    throw ValidationError("project: input width " + std::to_string(m.cols()) +
                          " does not match projection source dimension " + std::to_string(p.d));
  }
  return m * p.entries;
}

}  // namespace icldetail
