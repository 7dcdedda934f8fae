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

// icldetail command-line tool.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O
// failure. Errors are reported as one line on stderr:
//   icldetail: error: kind=<validation|numerical|io> message=<text>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icldetail.hpp"

namespace fs = std::filesystem;
using icldetail::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code(icldetail::ErrorKind kind) {
  switch (kind) {
    case icldetail::ErrorKind::kValidation:
      return kExitValidation;
    case icldetail::ErrorKind::kNumerical:
      return kExitNumerical;
    case icldetail::ErrorKind::kIo:
      return kExitIo;
  }
  return 1;
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') {
      c = ' ';
    }
  }
  return text;
}

// Options shared by the scoring commands.
struct ScoringOptions {
  double lambda = icldetail::kDefaultTestLambda;
  long proj_dim = 1000;
  std::uint64_t seed = 0;
  std::string gradient = "data_fit";
  std::size_t jobs = icldetail::default_jobs();

  icldetail::GradientForm gradient_form() const {
    return gradient == "regularized" ? icldetail::GradientForm::kRegularized
                                     : icldetail::GradientForm::kDataFit;
  }

  json to_json() const {
    return {{"lambda", lambda}, {"proj_dim", proj_dim}, {"seed", seed}, {"gradient", gradient}};
  }
};

void add_scoring_options(CLI::App* cmd, ScoringOptions& opts, double default_lambda,
                         bool with_jobs) {
  opts.lambda = default_lambda;
  cmd->add_option("--lambda", opts.lambda, "Ridge regularizer")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--proj-dim", opts.proj_dim,
                  "Random projection dimension; 0 disables, ignored when >= embedding width")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Projection / sampling seed")->capture_default_str();
  cmd->add_option("--gradient", opts.gradient,
                  "Per-example gradient: data_fit (default) or regularized (adds lambda*beta)")
      ->check(CLI::IsMember({"data_fit", "regularized"}))
      ->capture_default_str();
  if (with_jobs) {
    cmd->add_option("--jobs", opts.jobs, "Worker threads (default from ICLDETAIL_JOBS)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
}

// Projections keyed by source width, built on demand before any parallel
// section so workers only read.
class ProjectionCache {
 public:
  ProjectionCache(long proj_dim, std::uint64_t seed) : proj_dim_(proj_dim), seed_(seed) {}

  void prepare(Eigen::Index width) {
    if (applies(width) && !cache_.contains(width)) {
      cache_.emplace(width, icldetail::make_projection(seed_, width, proj_dim_));
    }
  }

  const icldetail::Projection* get(Eigen::Index width) const {
    const auto it = cache_.find(width);
    return it == cache_.end() ? nullptr : &it->second;
  }

  bool applies(Eigen::Index width) const { return proj_dim_ > 0 && proj_dim_ < width; }

 private:
  long proj_dim_;
  std::uint64_t seed_;
  std::map<Eigen::Index, icldetail::Projection> cache_;
};

class RunRecord {
 public:
  RunRecord(std::string command, json config)
      : command_(std::move(command)),
        config_(std::move(config)),
        start_(std::chrono::steady_clock::now()) {}

  json& config() { return config_; }

  // Primary artifact: JSON gets the resolved config embedded, CSV is written
  // as-is. The run metadata goes next to it as <output>.run.json.
  void emit(const fs::path& output, json artifact, const std::string& csv) const {
    if (icldetail::format_for(output) == icldetail::OutputFormat::kCsv) {
      icldetail::write_file(output, csv);
    } else {
      artifact["config"] = config_;
      icldetail::write_file(output, artifact.dump(2) + "\n");
    }
    write_metadata(fs::path(output.string() + ".run.json"));
  }

  void write_metadata(const fs::path& path) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const json meta = {{"command", command_},
                       {"config", config_},
                       {"version", ICLDETAIL_VERSION},
                       {"wall_time_s", seconds}};
    icldetail::write_file(path, meta.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_;
  std::chrono::steady_clock::time_point start_;
};

struct LoadedInstance {
  std::string id;
  icldetail::IclInstance instance;
  std::optional<std::vector<bool>> noisy_mask;
  std::optional<fs::path> validation;
};

std::vector<LoadedInstance> load_manifest(const fs::path& path) {
  const auto manifest = icldetail::read_manifest(path);
  if (manifest.instances.empty()) {
    throw icldetail::ValidationError(path.string() + ": manifest lists no instances");
  }
  std::vector<LoadedInstance> out;
  for (const auto& entry : manifest.instances) {
    const fs::path dump_path = manifest.resolve(entry.path);
    auto inst = icldetail::read_dump(dump_path).to_instance();
    if (inst.num_classes != manifest.num_classes) {
      throw icldetail::ValidationError(dump_path.string() + ": num_classes " +
                                       std::to_string(inst.num_classes) +
                                       " differs from manifest num_classes " +
                                       std::to_string(manifest.num_classes));
    }
    std::optional<fs::path> validation;
    if (entry.validation) {
      validation = manifest.resolve(*entry.validation);
    }
    out.push_back({entry.id, std::move(inst), entry.noisy_mask, validation});
  }
  return out;
}

void prepare_projections(ProjectionCache& cache, const std::vector<LoadedInstance>& data) {
  for (const auto& d : data) {
    cache.prepare(d.instance.width());
  }
}

json accuracy_summary(const std::vector<double>& correct) {
  const auto ms = icldetail::mean_stderr(correct);
  return {{"mean", ms.mean}, {"stderr", ms.std_error}};
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string input;
  std::string mode = "test";
  std::string output;
  ScoringOptions opts;
};

void cmd_score(const ScoreArgs& a) {
  json config = a.opts.to_json();
  config["input"] = a.input;
  config["mode"] = a.mode;
  RunRecord run("score", config);

  const auto inst = icldetail::read_dump(a.input).to_instance();
  ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
  cache.prepare(inst.width());
  run.config()["proj_dim_applied"] = cache.applies(inst.width()) ? a.opts.proj_dim : 0;
  const auto mode = a.mode == "self" ? icldetail::ScoreMode::kSelf : icldetail::ScoreMode::kTest;
  const auto scores = icldetail::detail_scores(inst, a.opts.lambda, mode, cache.get(inst.width()),
                                               a.opts.gradient_form());
  run.emit(a.output, icldetail::to_json(scores), icldetail::scores_csv(scores));
}

struct DetectArgs {
  std::string manifest;
  std::string output;
  ScoringOptions opts;
};

void cmd_detect(const DetectArgs& a) {
  json config = a.opts.to_json();
  config["manifest"] = a.manifest;
  RunRecord run("detect", config);

  const auto data = load_manifest(a.manifest);
  ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
  prepare_projections(cache, data);
  run.config()["proj_dim_applied"] =
      cache.applies(data.front().instance.width()) ? a.opts.proj_dim : 0;
  for (const auto& d : data) {
    if (!d.noisy_mask) {
      throw icldetail::ValidationError("detect: manifest entry '" + d.id + "' has no noisy_mask");
    }
  }

  std::vector<icldetail::DetectionReport> reports(data.size());
  std::vector<double> control(data.size());
  icldetail::parallel_for(data.size(), a.opts.jobs, [&](std::size_t t) {
    const auto& inst = data[t].instance;
    const auto scores =
        icldetail::detail_scores(inst, a.opts.lambda, icldetail::ScoreMode::kSelf,
                                 cache.get(inst.width()), a.opts.gradient_form());
    reports[t] = icldetail::detect_noisy(scores, *data[t].noisy_mask);
    control[t] = icldetail::label_shuffled_auc(scores, *data[t].noisy_mask, a.opts.seed, t);
  });

  json instances = json::array();
  std::vector<double> aucs;
  std::size_t steps = 0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    json entry = icldetail::to_json(reports[t]);
    entry["id"] = data[t].id;
    entry["label_shuffled_auc"] = control[t];
    instances.push_back(std::move(entry));
    aucs.push_back(reports[t].auc_roc);
    steps = std::max(steps, reports[t].fraction_detected_curve.size());
  }
  // Mean curve over instances; shorter curves are held at their final value.
  std::vector<icldetail::MeanStderr> curve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> column;
    for (const auto& r : reports) {
      const auto& c = r.fraction_detected_curve;
      column.push_back(k < c.size() ? c[k] : c.back());
    }
    curve[k] = icldetail::mean_stderr(column);
  }
  const json artifact = {{"instances", std::move(instances)},
                         {"median_auc", icldetail::median(aucs)},
                         {"mean_auc", icldetail::mean_stderr(aucs).mean},
                         {"label_shuffled_median_auc", icldetail::median(control)},
                         {"mean_curve", icldetail::accuracy_to_json(curve)}};
  run.emit(a.output, artifact, icldetail::accuracy_csv(curve));
  std::cout << "median_auc=" << icldetail::format_double(icldetail::median(aucs)) << "\n";
}

struct ReorderArgs {
  std::string input;
  std::string scores;
  std::string policy = "top2_front_then_ascending";
  std::string output;
  ScoringOptions opts;
};

void cmd_reorder(const ReorderArgs& a) {
  if (a.input.empty() == a.scores.empty()) {
    throw icldetail::ValidationError("reorder: give exactly one of --input or --scores");
  }
  json config = a.opts.to_json();
  config["input"] = a.input.empty() ? json(nullptr) : json(a.input);
  config["scores"] = a.scores.empty() ? json(nullptr) : json(a.scores);
  config["policy"] = a.policy;
  RunRecord run("reorder", config);

  icldetail::ScoreVector scores;
  if (!a.scores.empty()) {
    const std::string text = icldetail::read_file(a.scores);
    if (fs::path(a.scores).extension() == ".csv") {
      scores = icldetail::scores_from_csv(text, icldetail::ScoreMode::kSelf);
    } else {
      try {
        scores = icldetail::score_vector_from_json(json::parse(text));
      } catch (const json::exception& e) {
        throw icldetail::ValidationError(a.scores + ": not valid JSON: " + e.what());
      }
    }
    run.config()["proj_dim_applied"] = nullptr;
  } else {
    const auto inst = icldetail::read_dump(a.input).to_instance();
    ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
    cache.prepare(inst.width());
    run.config()["proj_dim_applied"] = cache.applies(inst.width()) ? a.opts.proj_dim : 0;
    scores = icldetail::detail_scores(inst, a.opts.lambda, icldetail::ScoreMode::kSelf,
                                      cache.get(inst.width()), a.opts.gradient_form());
  }
  const auto policy = a.policy == "descending" ? icldetail::ReorderPolicy::kDescending
                                               : icldetail::ReorderPolicy::kTop2FrontThenAscending;
  const auto ranking = icldetail::reorder(scores, policy);
  json artifact = icldetail::to_json(ranking);
  artifact["policy"] = a.policy;
  artifact["scores"] = scores.scores;
  std::string csv = "position,index\n";
  for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
    csv += std::to_string(pos) + "," + std::to_string(ranking.order[pos]) + "\n";
  }
  run.emit(a.output, artifact, csv);
}

struct CurateArgs {
  std::string manifest;
  std::string validation;
  std::size_t k = 0;
  std::string predictions;
  std::string output;
  ScoringOptions opts;
};

void cmd_curate(const CurateArgs& a) {
  json config = a.opts.to_json();
  config["manifest"] = a.manifest;
  config["validation"] = a.validation.empty() ? json(nullptr) : json(a.validation);
  config["k"] = a.k;
  config["predictions"] = a.predictions.empty() ? json(nullptr) : json(a.predictions);
  RunRecord run("curate", config);

  const auto data = load_manifest(a.manifest);
  ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
  prepare_projections(cache, data);
  run.config()["proj_dim_applied"] =
      cache.applies(data.front().instance.width()) ? a.opts.proj_dim : 0;

  std::optional<icldetail::ValidationSet> shared;
  if (!a.validation.empty()) {
    shared = icldetail::read_dump(a.validation).to_validation_set();
  }
  std::vector<icldetail::ValidationSet> validation(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (shared) {
      validation[t] = *shared;
    } else if (data[t].validation) {
      validation[t] = icldetail::read_dump(*data[t].validation).to_validation_set();
    } else {
      throw icldetail::ValidationError("curate: no --validation given and manifest entry '" +
                                       data[t].id + "' has no validation dump");
    }
  }
  std::optional<std::map<std::string, int>> predictions;
  if (!a.predictions.empty()) {
    predictions = icldetail::read_predictions(a.predictions, data.front().instance.num_classes);
  }

  struct Outcome {
    icldetail::CurationPlan plan;
    std::optional<bool> full, remove_low, remove_high;
  };
  std::vector<Outcome> outcomes(data.size());
  icldetail::parallel_for(data.size(), a.opts.jobs, [&](std::size_t t) {
    const auto& inst = data[t].instance;
    Outcome& out = outcomes[t];
    out.plan = icldetail::curate(inst, validation[t], a.opts.lambda, a.k, cache.get(inst.width()),
                                 a.opts.gradient_form());
    if (!inst.has_query() || !inst.query_label) {
      return;
    }
    const std::span<const std::size_t> order(out.plan.removal_order);
    auto judge = [&](const std::string& tag, std::span<const std::size_t> removed) {
      int predicted = 0;
      if (predictions) {
        const std::string key = data[t].id + "/curate/" + tag;
        const auto it = predictions->find(key);
        if (it == predictions->end()) {
          throw icldetail::ValidationError("curate: prediction file has no entry '" + key + "'");
        }
        predicted = it->second;
      } else {
        predicted = icldetail::predict_class(icldetail::remove_demonstrations(inst, removed),
                                             a.opts.lambda);
      }
      return predicted == *inst.query_label;
    };
    out.full = judge("full", {});
    out.remove_low = judge("low", order.first(a.k));
    out.remove_high = judge("high", order.last(a.k));
  });

  json instances = json::array();
  std::vector<double> full, low, high;
  for (std::size_t t = 0; t < data.size(); ++t) {
    json entry = icldetail::to_json(outcomes[t].plan);
    entry["id"] = data[t].id;
    auto flag = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
    entry["correct_full"] = flag(outcomes[t].full);
    entry["correct_remove_low"] = flag(outcomes[t].remove_low);
    entry["correct_remove_high"] = flag(outcomes[t].remove_high);
    if (outcomes[t].full) {
      full.push_back(*outcomes[t].full ? 1.0 : 0.0);
      low.push_back(*outcomes[t].remove_low ? 1.0 : 0.0);
      high.push_back(*outcomes[t].remove_high ? 1.0 : 0.0);
    }
    instances.push_back(std::move(entry));
  }
  json artifact = {{"instances", std::move(instances)}};
  std::string csv = "id,position,index,summed_score,removed\n";
  for (std::size_t t = 0; t < data.size(); ++t) {
    const auto& plan = outcomes[t].plan;
    for (std::size_t pos = 0; pos < plan.removal_order.size(); ++pos) {
      const std::size_t i = plan.removal_order[pos];
      csv += data[t].id + "," + std::to_string(pos) + "," + std::to_string(i) + "," +
             icldetail::format_double(plan.summed_scores[i]) + "," + (pos < a.k ? "1" : "0") + "\n";
    }
  }
  if (!full.empty()) {
    artifact["accuracy"] = {{"full", accuracy_summary(full)},
                            {"remove_low", accuracy_summary(low)},
                            {"remove_high", accuracy_summary(high)}};
  } else {
    artifact["accuracy"] = nullptr;
  }
  run.emit(a.output, artifact, csv);
}

struct PerturbArgs {
  std::string manifest;
  std::string mode = "remove";
  std::string which = "high";
  std::size_t k = 0;
  std::string predictions;
  std::string output;
  ScoringOptions opts;
};

void cmd_perturb(const PerturbArgs& a) {
  json config = a.opts.to_json();
  config["manifest"] = a.manifest;
  config["mode"] = a.mode;
  config["which"] = a.which;
  config["k"] = a.k;
  config["predictions"] = a.predictions.empty() ? json(nullptr) : json(a.predictions);
  RunRecord run("perturb", config);

  const auto data = load_manifest(a.manifest);
  ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
  prepare_projections(cache, data);
  const Eigen::Index width = data.front().instance.width();
  for (const auto& d : data) {
    if (d.instance.width() != width) {
      throw icldetail::ValidationError("perturb: manifest mixes embedding widths");
    }
  }
  run.config()["proj_dim_applied"] = cache.applies(width) ? a.opts.proj_dim : 0;

  std::vector<icldetail::IclInstance> dataset;
  for (const auto& d : data) {
    dataset.push_back(d.instance);
  }
  icldetail::PerturbConfig cfg;
  cfg.mode = a.mode == "corrupt" ? icldetail::PerturbMode::kCorrupt : icldetail::PerturbMode::kRemove;
  cfg.which = a.which == "low"      ? icldetail::PerturbWhich::kLow
              : a.which == "random" ? icldetail::PerturbWhich::kRandom
                                    : icldetail::PerturbWhich::kHigh;
  cfg.k = a.k;
  cfg.lambda = a.opts.lambda;
  cfg.seed = a.opts.seed;
  cfg.projection = cache.get(width);
  cfg.gradient = a.opts.gradient_form();
  cfg.jobs = a.opts.jobs;

  icldetail::Predictor predictor;
  std::map<std::string, int> predictions;
  if (!a.predictions.empty()) {
    predictions = icldetail::read_predictions(a.predictions, dataset.front().num_classes);
    predictor = [&](const icldetail::IclInstance&, std::size_t t, std::size_t step) {
      const std::string key = data[t].id + "/" + a.mode + "/" + a.which + "/" + std::to_string(step);
      const auto it = predictions.find(key);
      if (it == predictions.end()) {
        throw icldetail::ValidationError("perturb: prediction file has no entry '" + key + "'");
      }
      return it->second;
    };
  }
  const auto result = icldetail::perturb_experiment(dataset, cfg, predictor);

  json instances = json::array();
  for (std::size_t t = 0; t < data.size(); ++t) {
    instances.push_back({{"id", data[t].id},
                         {"order", result.order[t]},
                         {"corrupted_to", result.corrupted_to[t]},
                         {"correct", result.correct[t]}});
  }
  const json artifact = {{"accuracy", icldetail::accuracy_to_json(result.accuracy)},
                         {"instances", std::move(instances)}};
  run.emit(a.output, artifact, icldetail::accuracy_csv(result.accuracy));
}

struct SynthArgs {
  std::string config;
  std::string output_dir;
  std::size_t jobs = icldetail::default_jobs();
};

icldetail::SynthConfig parse_synth_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(icldetail::read_file(path));
  } catch (const json::exception& e) {
    throw icldetail::ValidationError(path + ": synth config is not valid JSON: " + e.what());
  }
  icldetail::SynthConfig cfg;
  try {
    static const std::vector<std::string> known = {"seed",           "n",
                                                   "d",              "num_classes",
                                                   "cluster_spread", "corrupt_count",
                                                   "instances",      "validation"};
    for (const auto& [key, value] : doc.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw icldetail::ValidationError(path + ": unknown synth config key '" + key + "'");
      }
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.n = doc.value("n", cfg.n);
    cfg.d = doc.value("d", cfg.d);
    cfg.num_classes = doc.value("num_classes", cfg.num_classes);
    cfg.cluster_spread = doc.value("cluster_spread", cfg.cluster_spread);
    cfg.corrupt_count = doc.value("corrupt_count", cfg.corrupt_count);
    cfg.instances = doc.value("instances", cfg.instances);
    cfg.validation = doc.value("validation", cfg.validation);
  } catch (const json::exception& e) {
    throw icldetail::ValidationError(path + ": malformed synth config: " + e.what());
  }
  cfg.validate();
  return cfg;
}

void cmd_synth(const SynthArgs& a) {
  const auto cfg = parse_synth_config(a.config);
  const json resolved = {{"seed", cfg.seed},
                         {"n", cfg.n},
                         {"d", cfg.d},
                         {"num_classes", cfg.num_classes},
                         {"cluster_spread", cfg.cluster_spread},
                         {"corrupt_count", cfg.corrupt_count},
                         {"instances", cfg.instances},
                         {"validation", cfg.validation}};
  RunRecord run("synth", {{"config", a.config}, {"output_dir", a.output_dir}, {"synth", resolved}});

  std::error_code ec;
  fs::create_directories(a.output_dir, ec);
  if (ec) {
    throw icldetail::IoError("cannot create " + a.output_dir + ": " + ec.message());
  }
  const auto generated = icldetail::gen_instances(cfg, a.jobs);
  icldetail::Manifest manifest;
  manifest.num_classes = cfg.num_classes;
  for (std::size_t t = 0; t < generated.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "instance_%05zu", t);
    const std::string dump_name = std::string(name) + ".dtld";
    auto dump = icldetail::EmbeddingDump::from_instance(generated[t].instance);
    icldetail::write_dump(dump, fs::path(a.output_dir) / dump_name);
    icldetail::ManifestEntry entry{name, dump_name, generated[t].noisy_mask, std::nullopt};
    if (cfg.validation > 0) {
      icldetail::EmbeddingDump v;
      v.rows = generated[t].validation.embeddings;
      v.num_classes = cfg.num_classes;
      for (int label : generated[t].validation.labels) {
        v.labels.emplace_back(label);
      }
      const std::string v_name = std::string(name) + "_validation.dtld";
      icldetail::write_dump(v, fs::path(a.output_dir) / v_name);
      entry.validation = v_name;
    }
    manifest.instances.push_back(std::move(entry));
  }
  json doc = icldetail::manifest_to_json(manifest);
  doc["synth"] = resolved;
  icldetail::write_file(fs::path(a.output_dir) / "manifest.json", doc.dump(2) + "\n");
  run.write_metadata(fs::path(a.output_dir) / "manifest.json.run.json");
}

struct OracleArgs {
  std::string input;
  std::string output;
  ScoringOptions opts;
};

void cmd_oracle(const OracleArgs& a) {
  json config = a.opts.to_json();
  config["input"] = a.input;
  RunRecord run("oracle", config);

  auto inst = icldetail::read_dump(a.input).to_instance();
  ProjectionCache cache(a.opts.proj_dim, a.opts.seed);
  cache.prepare(inst.width());
  run.config()["proj_dim_applied"] = cache.applies(inst.width()) ? a.opts.proj_dim : 0;
  if (const auto* p = cache.get(inst.width())) {
    inst = icldetail::project_instance(inst, *p);
  }
  const auto loo = icldetail::exact_loo_oracle(inst, a.opts.lambda);
  const auto scores = icldetail::detail_scores(inst, a.opts.lambda, icldetail::ScoreMode::kTest,
                                               nullptr, a.opts.gradient_form());
  const double rho = icldetail::spearman(loo, scores.scores);
  const json artifact = {{"loo", loo}, {"detail", scores.scores}, {"spearman", rho}};
  std::string csv = "index,loo,detail\n";
  for (std::size_t i = 0; i < loo.size(); ++i) {
    csv += std::to_string(i) + "," + icldetail::format_double(loo[i]) + "," +
           icldetail::format_double(scores.scores[i]) + "\n";
  }
  run.emit(a.output, artifact, csv);
  std::cout << "spearman=" << icldetail::format_double(rho) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Attribution of in-context demonstrations via influence on kernel ridge regression",
               "icldetail"};
  app.set_version_flag("--version", std::string(ICLDETAIL_VERSION));
  app.require_subcommand(1);
  std::function<void()> action;

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score every demonstration of one dump");
  s->add_option("--input", score.input, "Embedding dump")->required()->check(CLI::ExistingFile);
  s->add_option("--mode", score.mode, "test (query influence) or self")
      ->check(CLI::IsMember({"test", "self"}))
      ->capture_default_str();
  s->add_option("--output", score.output, "Output .json or .csv")->required();
  add_scoring_options(s, score.opts, icldetail::kDefaultTestLambda, false);
  s->callback([&] { action = [&] { cmd_score(score); }; });

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Noisy-label detection over a manifest");
  d->add_option("--manifest", detect.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  d->add_option("--output", detect.output, "Output .json or .csv")->required();
  add_scoring_options(d, detect.opts, icldetail::kDefaultSelfLambda, true);
  d->callback([&] { action = [&] { cmd_detect(detect); }; });

  ReorderArgs reorder;
  auto* r = app.add_subcommand("reorder", "Reorder demonstrations by self influence");
  r->add_option("--input", reorder.input, "Embedding dump")->check(CLI::ExistingFile);
  r->add_option("--scores", reorder.scores, "Self-mode scores file (.json or .csv)")
      ->check(CLI::ExistingFile);
  r->add_option("--policy", reorder.policy, "top2_front_then_ascending or descending")
      ->check(CLI::IsMember({"top2_front_then_ascending", "descending"}))
      ->capture_default_str();
  r->add_option("--output", reorder.output, "Output .json or .csv")->required();
  add_scoring_options(r, reorder.opts, icldetail::kDefaultSelfLambda, false);
  r->callback([&] { action = [&] { cmd_reorder(reorder); }; });

  CurateArgs curate;
  auto* c = app.add_subcommand("curate", "Plan removal of the least helpful demonstrations");
  c->add_option("--manifest", curate.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--validation", curate.validation, "Validation dump shared by all instances")
      ->check(CLI::ExistingFile);
  c->add_option("--k", curate.k, "Number of demonstrations to remove")->required();
  c->add_option("--predictions", curate.predictions,
                "External predictions keyed <id>/curate/<full|low|high>")
      ->check(CLI::ExistingFile);
  c->add_option("--output", curate.output, "Output .json or .csv")->required();
  add_scoring_options(c, curate.opts, icldetail::kDefaultTestLambda, true);
  c->callback([&] { action = [&] { cmd_curate(curate); }; });

  PerturbArgs perturb;
  auto* p = app.add_subcommand("perturb", "Accuracy after removing/corrupting ranked demonstrations");
  p->add_option("--manifest", perturb.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--mode", perturb.mode, "remove or corrupt")
      ->check(CLI::IsMember({"remove", "corrupt"}))
      ->capture_default_str();
  p->add_option("--which", perturb.which, "high, low or random")
      ->check(CLI::IsMember({"high", "low", "random"}))
      ->capture_default_str();
  p->add_option("--k", perturb.k, "Maximum number of demonstrations perturbed")->required();
  p->add_option("--predictions", perturb.predictions,
                "External predictions keyed <id>/<mode>/<which>/<step>")
      ->check(CLI::ExistingFile);
  p->add_option("--output", perturb.output, "Output .json or .csv")->required();
  add_scoring_options(p, perturb.opts, icldetail::kDefaultTestLambda, true);
  p->callback([&] { action = [&] { cmd_perturb(perturb); }; });

  SynthArgs synth;
  auto* y = app.add_subcommand("synth", "Generate synthetic instances and a manifest");
  y->add_option("--config", synth.config, "Synth config JSON")->required()->check(CLI::ExistingFile);
  y->add_option("--output-dir", synth.output_dir, "Directory for dumps and manifest.json")->required();
  y->add_option("--jobs", synth.jobs, "Worker threads")->check(CLI::PositiveNumber);
  y->callback([&] { action = [&] { cmd_synth(synth); }; });

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Exact leave-one-out vs test-mode scores for one dump");
  o->add_option("--input", oracle.input, "Embedding dump")->required()->check(CLI::ExistingFile);
  o->add_option("--output", oracle.output, "Output .json or .csv")->required();
  add_scoring_options(o, oracle.opts, icldetail::kDefaultTestLambda, false);
  o->callback([&] { action = [&] { cmd_oracle(oracle); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "icldetail: error: kind=validation message=" << one_line(e.what()) << "\n";
    return kExitValidation;
  }
  try {
    action();
  } catch (const icldetail::Error& e) {
    std::cerr << "icldetail: error: kind=" << icldetail::to_string(e.kind())
              << " message=" << one_line(e.what()) << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "icldetail: error: kind=internal message=" << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
