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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icldetail.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using icldetail::json;
using icldetail::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

// --- 1 ---------------------------------------------------------------------
Outcome primal_dual() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  double fit_seconds = 0.0;
  int fits = 0;
  for (int classes : {2, 4}) {
    for (double lambda : {1e-9, 1.0, 10.0}) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto inst = oracle::random_instance(rng, 20, 64, classes);
        const Stopwatch watch;
        const auto fit = icldetail::fit_ridge(inst, lambda);
        fit_seconds += watch.seconds();
        const Matrix primal = oracle::primal_beta(
            inst.demo_embeddings, oracle::targets(inst.demo_labels, classes), lambda);
        worst = std::max(worst, (fit.beta - primal).norm() / primal.norm());
        ++fits;
      }
    }
  }
  return {worst <= 1e-8 && fit_seconds < 1.0,
          std::to_string(fits) + " fits, max relative discrepancy " + fmt(worst) +
              " (limit 1e-08), fit time " + fmt(fit_seconds) + " s (limit 1 s)"};
}

// --- 2 ---------------------------------------------------------------------
Outcome gradient_check() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> lam(0.01, 10.0);
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (int point = 0; point < 50; ++point) {
    const Eigen::Index w = 4 + point % 13;
    const int classes = 2 + point % 3;
    const Matrix m = oracle::random_matrix(rng, 1, w);
    const Matrix y = icldetail::one_hot(point % classes, classes);
    icldetail::RidgeFit fit;
    fit.beta = oracle::random_matrix(rng, w, classes);
    fit.lambda = lam(rng);
    auto loss = [&](const Matrix& beta) {
      return 0.5 * (m * beta - y).squaredNorm() + 0.5 * fit.lambda * beta.squaredNorm();
    };
    const Matrix g = icldetail::grad_loss(m, y, fit);
    Matrix fd(w, classes);
    for (Eigen::Index r = 0; r < w; ++r) {
      for (Eigen::Index c = 0; c < classes; ++c) {
        Matrix up = fit.beta;
        Matrix down = fit.beta;
        up(r, c) += kStep;
        down(r, c) -= kStep;
        fd(r, c) = (loss(up) - loss(down)) / (2 * kStep);
      }
    }
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  return {worst <= 1e-5, "50 points, max relative error " + fmt(worst) + " (limit 1e-05)"};
}

// --- 3 ---------------------------------------------------------------------
Outcome oracle_agreement() {
  const Stopwatch watch;
  icldetail::SynthConfig cfg;
  cfg.seed = 303;
  cfg.n = 20;
  cfg.d = 50;
  cfg.num_classes = 2;
  cfg.cluster_spread = 0.3;
  cfg.instances = 100;
  std::vector<double> rho;
  for (const auto& s : icldetail::gen_instances(cfg)) {
    const auto loo = icldetail::exact_loo_oracle(s.instance, 1.0);
    const auto scores = icldetail::detail_scores(s.instance, 1.0, icldetail::ScoreMode::kTest);
    rho.push_back(icldetail::spearman(loo, scores.scores));
  }
  const double med = icldetail::median(rho);
  const double secs = watch.seconds();
  return {med >= 0.9 && secs < 30.0, "median Spearman " + fmt(med) + " (limit 0.9), min " +
                                          fmt(*std::min_element(rho.begin(), rho.end())) + ", " +
                                          fmt(secs) + " s (limit 30 s)"};
}

// --- 4 ---------------------------------------------------------------------
Outcome noisy_detection() {
  const Stopwatch watch;
  icldetail::SynthConfig cfg;
  cfg.seed = 1;
  cfg.n = 20;
  cfg.d = 64;
  cfg.num_classes = 2;
  cfg.cluster_spread = 0.3;
  cfg.corrupt_count = 4;
  cfg.instances = 100;
  std::vector<double> auc;
  std::vector<double> control;
  const auto data = icldetail::gen_instances(cfg);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const auto scores = icldetail::detail_scores(data[t].instance, 1e-9, icldetail::ScoreMode::kSelf);
    auc.push_back(icldetail::detect_noisy(scores, data[t].noisy_mask).auc_roc);
    control.push_back(icldetail::label_shuffled_auc(scores, data[t].noisy_mask, 404, t));
  }
  const double med = icldetail::median(auc);
  const double ctl = icldetail::median(control);
  const double secs = watch.seconds();
  const bool pass = med >= 0.8 && med > ctl && std::abs(ctl - 0.5) <= 0.1 && secs < 60.0;
  return {pass, "median AUC " + fmt(med) + " (limit 0.8), label-shuffled control " + fmt(ctl) +
                    " (expected 0.5 +- 0.1), " + fmt(secs) + " s (limit 60 s)"};
}

// --- 5 ---------------------------------------------------------------------
Outcome perturbation_gap() {
  const Stopwatch watch;
  icldetail::SynthConfig cfg;
  cfg.seed = 505;
  cfg.n = 20;
  cfg.d = 64;
  cfg.num_classes = 4;
  cfg.cluster_spread = 0.3;
  cfg.corrupt_count = 4;
  cfg.instances = 100;
  std::vector<icldetail::IclInstance> dataset;
  for (const auto& s : icldetail::gen_instances(cfg)) {
    dataset.push_back(s.instance);
  }
  auto accuracy = [&](icldetail::PerturbWhich which) {
    icldetail::PerturbConfig pc;
    pc.mode = icldetail::PerturbMode::kRemove;
    pc.which = which;
    pc.k = 10;
    pc.lambda = 1.0;
    pc.seed = 505;
    return icldetail::perturb_experiment(dataset, pc).accuracy.back().mean;
  };
  const double high = accuracy(icldetail::PerturbWhich::kHigh);
  const double low = accuracy(icldetail::PerturbWhich::kLow);
  const double random = accuracy(icldetail::PerturbWhich::kRandom);
  const double secs = watch.seconds();
  const bool pass = low - high >= 0.15 && random > high && random < low && secs < 60.0;
  return {pass, "k=10 accuracy remove-low " + fmt(low) + ", random " + fmt(random) +
                    ", remove-high " + fmt(high) + ", gap " + fmt(low - high) + " (limit 0.15), " +
                    fmt(secs) + " s (limit 60 s)"};
}

// --- 6 ---------------------------------------------------------------------
Outcome jl_projection() {
  std::mt19937_64 rng(606);
  const Matrix x = oracle::random_matrix(rng, 21, 4096);
  double worst_fraction = 1.0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = icldetail::make_projection(seed, 4096, 1000);
    const Matrix y = icldetail::project(x, p);
    int within = 0;
    int total = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
        const double ratio =
            (y.row(i) - y.row(j)).squaredNorm() / (x.row(i) - x.row(j)).squaredNorm();
        within += std::abs(ratio - 1.0) <= 0.2 ? 1 : 0;
        worst_ratio = std::max(worst_ratio, std::abs(ratio - 1.0));
        ++total;
      }
    }
    worst_fraction = std::min(worst_fraction, static_cast<double>(within) / total);
  }
  return {worst_fraction >= 0.95, "lowest per-seed fraction within eps=0.2: " + fmt(worst_fraction) +
                                      " (limit 0.95), largest distortion " + fmt(worst_ratio)};
}

// --- 7 ---------------------------------------------------------------------
Outcome projection_speedup() {
  icldetail::SynthConfig cfg;
  cfg.seed = 707;
  cfg.n = 20;
  cfg.d = 4096;
  const auto inst = icldetail::gen_instance(cfg, 0).instance;
  auto best_of = [](int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
      const Stopwatch watch;
      fn();
      best = std::min(best, watch.seconds());
    }
    return best;
  };
  // projected timing includes building the 4096 x 1000 projection
  const double projected = best_of(3, [&] {
    const auto p = icldetail::make_projection(0, 4096, 1000);
    icldetail::detail_scores(inst, 1.0, icldetail::ScoreMode::kTest, &p);
  });
  const double full = best_of(2, [&] {
    icldetail::detail_scores(inst, 1.0, icldetail::ScoreMode::kTest);
  });
  const double speedup = full / projected;
  return {speedup >= 5.0 && projected < 2.0,
          "d'=1000 " + fmt(projected) + " s (limit 2 s), full d=4096 " + fmt(full) + " s, speedup " +
              fmt(speedup) + "x (limit 5x)"};
}

// --- 8 ---------------------------------------------------------------------
int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + ICLDETAIL_CLI_PATH + "' " + args +
                          " > /dev/null 2>> stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json without_wall_time(json meta) {
  meta.erase("wall_time_s");
  return meta;
}

Outcome determinism() {
  const fs::path dir = ICLDETAIL_TEST_TMP;
  fs::remove_all(dir);
  fs::create_directories(dir);
  icldetail::write_file(dir / "synth.json",
                        R"({"seed": 8, "n": 20, "d": 64, "num_classes": 3, "cluster_spread": 0.3,)"
                        R"( "corrupt_count": 3, "instances": 12, "validation": 6})");
  icldetail::write_file(dir / "scores.json",
                        R"({"mode": "self", "lambda": 1e-9, "scores": [5, 1, 3, 2, 4]})");

  struct Command {
    std::string name;
    std::string args;  // "{out}" is replaced by the output path
    std::string ext;
  };
  const std::vector<Command> commands = {
      {"score-test", "score --input a/instance_00000.dtld --proj-dim 32 --seed 3 --output {out}", ".json"},
      {"score-self", "score --input a/instance_00001.dtld --mode self --output {out}", ".csv"},
      {"detect", "detect --manifest a/manifest.json --proj-dim 48 --jobs 2 --output {out}", ".json"},
      {"detect-csv", "detect --manifest a/manifest.json --output {out}", ".csv"},
      {"reorder-dump", "reorder --input a/instance_00002.dtld --output {out}", ".json"},
      {"reorder-scores", "reorder --scores scores.json --output {out}", ".csv"},
      {"curate", "curate --manifest a/manifest.json --k 5 --jobs 2 --output {out}", ".json"},
      {"perturb-remove", "perturb --manifest a/manifest.json --mode remove --which high --k 6 --output {out}", ".json"},
      {"perturb-corrupt", "perturb --manifest a/manifest.json --mode corrupt --which random --k 6 --seed 4 --jobs 3 --output {out}", ".json"},
      {"oracle", "oracle --input a/instance_00003.dtld --output {out}", ".json"},
  };

  std::vector<std::string> failures;
  int checked = 0;
  // Every file the run wrote, keyed by path relative to the scratch dir.
  auto snapshot = [&](const std::vector<fs::path>& paths) {
    std::vector<std::pair<fs::path, std::string>> out;
    for (const auto& p : paths) {
      if (fs::is_directory(dir / p)) {
        for (const auto& entry : fs::directory_iterator(dir / p)) {
          out.emplace_back(fs::relative(entry.path(), dir), icldetail::read_file(entry.path()));
        }
      } else if (fs::exists(dir / p)) {
        out.emplace_back(p, icldetail::read_file(dir / p));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  auto compare = [&](const std::vector<std::pair<fs::path, std::string>>& first,
                     const std::vector<std::pair<fs::path, std::string>>& second) {
    if (first.size() != second.size()) {
      failures.push_back("file count");
      return;
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
      ++checked;
      const auto& [path, bytes] = first[i];
      bool same = path == second[i].first;
      if (same && path.string().ends_with(".run.json")) {
        same = without_wall_time(json::parse(bytes)) == without_wall_time(json::parse(second[i].second));
      } else if (same) {
        same = bytes == second[i].second;
      }
      if (!same) {
        failures.push_back(path.string());
      }
    }
  };

  // Each command runs twice with the same flags and output path.
  auto twice = [&](const std::string& args, const std::vector<fs::path>& outputs) -> bool {
    if (run_cli(dir, args) != 0) {
      return false;
    }
    const auto first = snapshot(outputs);
    if (first.empty() || run_cli(dir, args) != 0) {
      return false;
    }
    compare(first, snapshot(outputs));
    return true;
  };

  if (!twice("synth --config synth.json --output-dir a", {"a"})) {
    return {false, "synth failed, see " + (dir / "stderr.txt").string()};
  }
  for (const auto& c : commands) {
    const std::string out = c.name + c.ext;
    std::string args = c.args;
    args.replace(args.find("{out}"), 5, out);
    if (!twice(args, {out, out + ".run.json"})) {
      return {false, c.name + " failed, see " + (dir / "stderr.txt").string()};
    }
  }
  std::string detail = std::to_string(commands.size() + 1) + " commands, " + std::to_string(checked) +
                       " artifacts compared (run metadata without wall_time_s)";
  if (!failures.empty()) {
    detail += ", differing: " + failures.front();
  }
  return {failures.empty(), detail};
}

// --- 9 ---------------------------------------------------------------------
Outcome format_round_trip() {
  const fs::path dir = fs::path(ICLDETAIL_TEST_TMP) / "dumps";
  fs::create_directories(dir);
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> size(1, 24);
  std::uniform_real_distribution<double> value(-1e4, 1e4);
  std::bernoulli_distribution coin(0.5);
  const std::hash<std::string> hash;
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    icldetail::EmbeddingDump dump;
    const int n = size(rng);
    const int d = size(rng);
    dump.num_classes = 1 + size(rng) % 5;
    dump.rows.resize(n, d);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < d; ++c) {
        dump.rows(r, c) = coin(rng) ? value(rng) : value(rng) * 1e-6;
      }
      dump.labels.emplace_back(static_cast<int>(rng() % static_cast<unsigned>(dump.num_classes)));
    }
    if (coin(rng)) {
      dump.query_index = static_cast<std::size_t>(n - 1);
      if (coin(rng)) {
        dump.labels.back().reset();
      }
    }
    if (coin(rng)) {
      dump.layer = size(rng);
    }
    if (coin(rng)) {
      std::vector<std::int64_t> pos(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r) {
        pos[static_cast<std::size_t>(r)] = 7 * r + 3;
      }
      dump.target_positions = pos;
      dump.source = "model-" + std::to_string(i);
    }
    const fs::path first = dir / "first.dtld";
    const fs::path second = dir / "second.dtld";
    icldetail::write_dump(dump, first);
    icldetail::write_dump(icldetail::read_dump(first), second);
    const std::string a = icldetail::read_file(first);
    const std::string b = icldetail::read_file(second);
    if (hash(a) != hash(b) || a != b) {
      ++mismatches;
    }
  }
  return {mismatches == 0, "1000 dumps, " + std::to_string(mismatches) + " hash mismatches"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*check)();
  };
  const std::vector<Criterion> criteria = {
      {1, "primal-dual ridge equivalence", primal_dual},
      {2, "gradient finite-difference check", gradient_check},
      {3, "leave-one-out oracle agreement", oracle_agreement},
      {4, "noisy-label detection", noisy_detection},
      {5, "perturbation gap", perturbation_gap},
      {6, "random projection distance preservation", jl_projection},
      {7, "projection speedup", projection_speedup},
      {8, "CLI determinism", determinism},
      {9, "dump format round trip", format_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("AC%d %s %s: %s\n", c.id, outcome.pass ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str());
    std::fflush(stdout);
    failed += outcome.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
