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

// On-disk formats.
//
// Embedding dump (".dtld"), all integers little-endian:
//
//   offset  size        field
//   0       4           magic "DTLD"
//   4       4           version, uint32 = 1
//   8       4           meta_len, uint32
//   12      meta_len    UTF-8 JSON metadata, keys sorted, no whitespace
//   12+L    4·n·dim     float32 payload, row-major n_rows × dim
//
// Metadata keys: dim, n_rows, num_classes, labels (null allowed only at the
// query row), query_index (null: every row is a demonstration), layer (int or
// null), source, and optionally target_positions. Unknown keys are kept and
// written back unchanged.
//
// Manifest: {"instances": [{"id", "path", "noisy_mask"?, "validation"?}],
// "num_classes"}; paths are relative to the manifest's directory.
//
// Prediction file: [{"instance_id": string, "predicted_class": int}, ...].

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "icldetail/error.hpp"
#include "icldetail/influence.hpp"
#include "icldetail/linalg.hpp"
#include "icldetail/metrics.hpp"
#include "icldetail/tasks.hpp"

namespace icldetail {

using json = nlohmann::json;

inline constexpr std::array<char, 4> kDumpMagic = {'D', 'T', 'L', 'D'};
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 12;

struct EmbeddingDump {
  Matrix rows;  // n_rows × dim; the query, if any, is one of these rows
  std::vector<std::optional<int>> labels;
  int num_classes = 2;
  std::optional<std::size_t> query_index;
  std::optional<int> layer;
  std::string source = "synthetic";
  std::optional<std::vector<std::int64_t>> target_positions;
  json extra = json::object();

  std::size_t n_rows() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }

  void validate() const {
    if (rows.rows() == 0) {
      throw ValidationError("dump: n_rows must be at least 1");
    }
    if (rows.cols() == 0) {
      throw ValidationError("dump: dim must be at least 1");
    }
    if (num_classes < 1) {
      throw ValidationError("dump: num_classes must be positive");
    }
    if (labels.size() != n_rows()) {
      throw ValidationError("dump: labels has " + std::to_string(labels.size()) +
                            " entries, n_rows is " + std::to_string(n_rows()));
    }
    if (query_index && *query_index >= n_rows()) {
      throw ValidationError("dump: query_index " + std::to_string(*query_index) +
                            " out of range for n_rows " + std::to_string(n_rows()));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i]) {
        if (!query_index || *query_index != i) {
          throw ValidationError("dump: labels[" + std::to_string(i) +
                                "] is null but only the query row may be unlabeled");
        }
        continue;
      }
      if (*labels[i] < 0 || *labels[i] >= num_classes) {
        throw ValidationError("dump: labels[" + std::to_string(i) + "] = " +
                              std::to_string(*labels[i]) + " outside [0, " +
                              std::to_string(num_classes) + ")");
      }
    }
    if (target_positions && target_positions->size() != n_rows()) {
      throw ValidationError("dump: target_positions has " +
                            std::to_string(target_positions->size()) + " entries, n_rows is " +
                            std::to_string(n_rows()));
    }
    if (!rows.allFinite()) {
      throw ValidationError("dump: payload contains non-finite values");
    }
  }

  // Query row (if any) becomes the query; the other rows, in order, the
  // demonstrations.
  IclInstance to_instance() const {
    validate();
    IclInstance inst;
    inst.num_classes = num_classes;
    const Eigen::Index demos = rows.rows() - (query_index ? 1 : 0);
    inst.demo_embeddings.resize(demos, rows.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n_rows(); ++i) {
      if (query_index && *query_index == i) {
        inst.query_embedding = rows.row(static_cast<Eigen::Index>(i));
        inst.query_label = labels[i];
        continue;
      }
      inst.demo_embeddings.row(r++) = rows.row(static_cast<Eigen::Index>(i));
      inst.demo_labels.push_back(*labels[i]);
    }
    if (!query_index) {
      inst.query_embedding = Matrix(0, rows.cols());
    }
    return inst;
  }

  // Every non-query row as a validation anchor.
  ValidationSet to_validation_set() const {
    const IclInstance inst = to_instance();
    return {inst.demo_embeddings, inst.demo_labels};
  }

  static EmbeddingDump from_instance(const IclInstance& inst, std::string source = "synthetic") {
    inst.validate();
    EmbeddingDump dump;
    dump.num_classes = inst.num_classes;
    dump.source = std::move(source);
    const Eigen::Index n = inst.size() + (inst.has_query() ? 1 : 0);
    dump.rows.resize(n, inst.width());
    dump.rows.topRows(inst.size()) = inst.demo_embeddings;
    for (int label : inst.demo_labels) {
      dump.labels.emplace_back(label);
    }
    if (inst.has_query()) {
      dump.rows.row(n - 1) = inst.query_embedding.row(0);
      dump.labels.push_back(inst.query_label);
      dump.query_index = static_cast<std::size_t>(n - 1);
    }
    return dump;
  }
};

namespace internal {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

inline std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) {
    v = (v << 8) | static_cast<unsigned char>(in[offset + static_cast<std::size_t>(b)]);
  }
  return v;
}

template <typename T>
T require_key(const json& meta, const char* key) {
  if (!meta.contains(key)) {
    throw ValidationError(std::string("dump: metadata is missing key '") + key + "'");
  }
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("dump: metadata key '") + key + "' has the wrong type: " +
                          e.what());
  }
}

inline const std::array<const char*, 8> kKnownMetaKeys = {
    "dim", "n_rows", "num_classes", "labels", "query_index", "layer", "source", "target_positions"};

}  // namespace internal

inline json dump_metadata(const EmbeddingDump& dump) {
  json meta = dump.extra.is_object() ? dump.extra : json::object();
  meta["dim"] = dump.dim();
  meta["n_rows"] = dump.n_rows();
  meta["num_classes"] = dump.num_classes;
  json labels = json::array();
  for (const auto& label : dump.labels) {
    labels.push_back(label ? json(*label) : json(nullptr));
  }
  meta["labels"] = std::move(labels);
  meta["query_index"] = dump.query_index ? json(*dump.query_index) : json(nullptr);
  meta["layer"] = dump.layer ? json(*dump.layer) : json(nullptr);
  meta["source"] = dump.source;
  if (dump.target_positions) {
    meta["target_positions"] = *dump.target_positions;
  }
  return meta;
}

// Byte image of a dump. Equal content always yields equal bytes.
inline std::string encode_dump(const EmbeddingDump& dump) {
  dump.validate();
  const std::string meta = dump_metadata(dump).dump();
  if (meta.size() > UINT32_MAX) {
    throw ValidationError("dump: metadata too large");
  }
  std::string out;
  out.reserve(kDumpHeaderBytes + meta.size() + 4 * dump.n_rows() * dump.dim());
  out.append(kDumpMagic.data(), kDumpMagic.size());
  internal::put_u32(out, kDumpVersion);
  internal::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  for (Eigen::Index r = 0; r < dump.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < dump.rows.cols(); ++c) {
      const auto value = static_cast<float>(dump.rows(r, c));
      if (!std::isfinite(value)) {
        throw ValidationError("dump: value at row " + std::to_string(r) + ", column " +
                              std::to_string(c) + " is not representable as float32");
      }
      internal::put_u32(out, std::bit_cast<std::uint32_t>(value));
    }
  }
  return out;
}

inline EmbeddingDump decode_dump(std::string_view bytes) {
  if (bytes.size() < kDumpHeaderBytes) {
    throw ValidationError("dump: file is " + std::to_string(bytes.size()) +
                          " bytes, shorter than the 12-byte header");
  }
  if (std::memcmp(bytes.data(), kDumpMagic.data(), kDumpMagic.size()) != 0) {
    throw ValidationError("dump: bad magic, expected \"DTLD\"");
  }
  const std::uint32_t version = internal::get_u32(bytes, 4);
  if (version != kDumpVersion) {
    throw ValidationError("dump: unsupported version " + std::to_string(version) + ", expected 1");
  }
  const std::uint32_t meta_len = internal::get_u32(bytes, 8);
  if (bytes.size() < kDumpHeaderBytes + meta_len) {
    throw ValidationError("dump: meta_len " + std::to_string(meta_len) + " exceeds the " +
                          std::to_string(bytes.size() - kDumpHeaderBytes) +
                          " bytes that follow the header");
  }
  json meta;
  try {
    meta = json::parse(bytes.substr(kDumpHeaderBytes, meta_len));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("dump: metadata is not valid JSON: ") + e.what());
  }
  if (!meta.is_object()) {
    throw ValidationError("dump: metadata must be a JSON object");
  }

  EmbeddingDump dump;
  for (const char* key : {"dim", "n_rows"}) {
    if (meta.contains(key) && !meta[key].is_number_unsigned()) {
      throw ValidationError(std::string("dump: metadata key '") + key +
                            "' must be a non-negative integer");
    }
  }
  const auto dim = internal::require_key<std::size_t>(meta, "dim");
  const auto n_rows = internal::require_key<std::size_t>(meta, "n_rows");
  dump.num_classes = internal::require_key<int>(meta, "num_classes");
  const auto labels = internal::require_key<json>(meta, "labels");
  if (!labels.is_array()) {
    throw ValidationError("dump: metadata key 'labels' must be an array");
  }
  for (const auto& label : labels) {
    if (label.is_null()) {
      dump.labels.emplace_back(std::nullopt);
    } else if (label.is_number_integer()) {
      dump.labels.emplace_back(label.get<int>());
    } else {
      throw ValidationError("dump: labels must be integers or null");
    }
  }
  const auto query = internal::require_key<json>(meta, "query_index");
  if (!query.is_null()) {
    if (!query.is_number_unsigned()) {
      throw ValidationError("dump: query_index must be a non-negative integer or null");
    }
    dump.query_index = query.get<std::size_t>();
  }
  const auto layer = internal::require_key<json>(meta, "layer");
  if (!layer.is_null()) {
    if (!layer.is_number_integer()) {
      throw ValidationError("dump: layer must be an integer or null");
    }
    dump.layer = layer.get<int>();
  }
  dump.source = internal::require_key<std::string>(meta, "source");
  if (meta.contains("target_positions")) {
    dump.target_positions = internal::require_key<std::vector<std::int64_t>>(meta, "target_positions");
  }
  for (const auto& [key, value] : meta.items()) {
    if (std::find(internal::kKnownMetaKeys.begin(), internal::kKnownMetaKeys.end(), key) ==
        internal::kKnownMetaKeys.end()) {
      dump.extra[key] = value;
    }
  }

  const std::size_t payload = bytes.size() - kDumpHeaderBytes - meta_len;
  if (dim != 0 && n_rows > (SIZE_MAX / 4) / dim) {
    throw ValidationError("dump: payload length mismatch, n_rows x dim overflows");
  }
  const std::size_t expected = 4 * n_rows * dim;
  if (payload != expected) {
    throw ValidationError("dump: payload length mismatch, expected " + std::to_string(expected) +
                          " bytes (4 x " + std::to_string(n_rows) + " x " + std::to_string(dim) +
                          "), found " + std::to_string(payload));
  }
  dump.rows.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(dim));
  std::size_t offset = kDumpHeaderBytes + meta_len;
  for (Eigen::Index r = 0; r < dump.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < dump.rows.cols(); ++c, offset += 4) {
      const float value = std::bit_cast<float>(internal::get_u32(bytes, offset));
      if (!std::isfinite(value)) {
        throw ValidationError("dump: non-finite payload value at row " + std::to_string(r) +
                              ", column " + std::to_string(c));
      }
      dump.rows(r, c) = static_cast<double>(value);
    }
  }
  dump.validate();
  return dump;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed reading " + path.string());
  }
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

inline EmbeddingDump read_dump(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_dump(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline void write_dump(const EmbeddingDump& dump, const std::filesystem::path& path) {
  write_file(path, encode_dump(dump));
}

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  std::optional<std::vector<bool>> noisy_mask;
  std::optional<std::filesystem::path> validation;
};

struct Manifest {
  std::vector<ManifestEntry> instances;
  int num_classes = 2;
  std::filesystem::path base_dir;  // where relative paths resolve

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

inline json manifest_to_json(const Manifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.instances) {
    json entry = {{"id", e.id}, {"path", e.path.generic_string()}};
    if (e.noisy_mask) {
      entry["noisy_mask"] = *e.noisy_mask;
    }
    if (e.validation) {
      entry["validation"] = e.validation->generic_string();
    }
    entries.push_back(std::move(entry));
  }
  return {{"instances", std::move(entries)}, {"num_classes", manifest.num_classes}};
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": manifest is not valid JSON: " + e.what());
  }
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  try {
    manifest.num_classes = doc.at("num_classes").get<int>();
    for (const auto& entry : doc.at("instances")) {
      ManifestEntry e;
      e.id = entry.at("id").get<std::string>();
      e.path = entry.at("path").get<std::string>();
      if (entry.contains("noisy_mask") && !entry["noisy_mask"].is_null()) {
        e.noisy_mask = entry["noisy_mask"].get<std::vector<bool>>();
      }
      if (entry.contains("validation") && !entry["validation"].is_null()) {
        e.validation = entry["validation"].get<std::string>();
      }
      manifest.instances.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed manifest: " + e.what());
  }
  if (manifest.num_classes < 1) {
    throw ValidationError(path.string() + ": manifest num_classes must be positive");
  }
  return manifest;
}

inline void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  write_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

struct Prediction {
  std::string instance_id;
  int predicted_class = 0;
};

inline std::map<std::string, int> read_predictions(const std::filesystem::path& path,
                                                   int num_classes) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": predictions are not valid JSON: " + e.what());
  }
  if (!doc.is_array()) {
    throw ValidationError(path.string() + ": prediction file must be a JSON array");
  }
  std::map<std::string, int> out;
  for (const auto& entry : doc) {
    Prediction p;
    try {
      p.instance_id = entry.at("instance_id").get<std::string>();
      p.predicted_class = entry.at("predicted_class").get<int>();
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": malformed prediction entry: " + e.what());
    }
    if (p.predicted_class < 0 || p.predicted_class >= num_classes) {
      throw ValidationError(path.string() + ": predicted_class " +
                            std::to_string(p.predicted_class) + " for '" + p.instance_id +
                            "' outside [0, " + std::to_string(num_classes) + ")");
    }
    out[p.instance_id] = p.predicted_class;
  }
  return out;
}

inline void write_predictions(const std::vector<Prediction>& predictions,
                              const std::filesystem::path& path) {
  json doc = json::array();
  for (const auto& p : predictions) {
    doc.push_back({{"instance_id", p.instance_id}, {"predicted_class", p.predicted_class}});
  }
  write_file(path, doc.dump(2) + "\n");
}

// Result artifacts.

enum class OutputFormat { kCsv, kJson };

inline OutputFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? OutputFormat::kCsv : OutputFormat::kJson;
}

// Shortest decimal that parses back to the same double.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    throw ValidationError("cannot format floating-point value");
  }
  return std::string(buf.data(), end);
}

inline json to_json(const ScoreVector& s) {
  json j = {{"mode", to_string(s.mode)},
            {"lambda", s.lambda},
            {"gradient", to_string(s.gradient)},
            {"scores", s.scores},
            {"ranks", descending_ranks(s.scores)}};
  j["projection_seed"] = s.projection_seed ? json(*s.projection_seed) : json(nullptr);
  j["projection_dim"] = s.projection_dim ? json(*s.projection_dim) : json(nullptr);
  return j;
}

inline ScoreVector score_vector_from_json(const json& j) {
  ScoreVector s;
  try {
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "test" && mode != "self") {
      throw ValidationError("scores: unknown mode '" + mode + "'");
    }
    s.mode = mode == "test" ? ScoreMode::kTest : ScoreMode::kSelf;
    s.lambda = j.at("lambda").get<double>();
    s.scores = j.at("scores").get<std::vector<double>>();
    if (j.contains("gradient")) {
      s.gradient = j["gradient"].get<std::string>() == "regularized" ? GradientForm::kRegularized
                                                                      : GradientForm::kDataFit;
    }
    if (j.contains("projection_seed") && !j["projection_seed"].is_null()) {
      s.projection_seed = j["projection_seed"].get<std::uint64_t>();
    }
    if (j.contains("projection_dim") && !j["projection_dim"].is_null()) {
      s.projection_dim = j["projection_dim"].get<Eigen::Index>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scores: malformed JSON: ") + e.what());
  }
  return s;
}

// index,score,rank with rank 0 the highest score.
inline std::string scores_csv(const ScoreVector& s) {
  const auto rank = descending_ranks(s.scores);
  std::string out = "index,score,rank\n";
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    out += std::to_string(i) + "," + format_double(s.scores[i]) + "," + std::to_string(rank[i]) + "\n";
  }
  return out;
}

// Reads index,score[,rank] rows; the mode is not recorded in CSV.
inline ScoreVector scores_from_csv(std::string_view text, ScoreMode mode) {
  ScoreVector s;
  s.mode = mode;
  std::istringstream in{std::string(text)};
  std::string line;
  std::getline(in, line);
  if (line.rfind("index,score", 0) != 0) {
    throw ValidationError("scores CSV: expected header 'index,score,rank'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (first == std::string::npos) {
      throw ValidationError("scores CSV: malformed row '" + line + "'");
    }
    const std::string field = line.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                                 : second - first - 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ValidationError("scores CSV: bad score '" + field + "'");
    }
    s.scores.push_back(value);
  }
  return s;
}

inline json to_json(const Ranking& r) {
  return {{"order", r.order},
          {"basis", to_string(r.basis)},
          {"direction", r.direction == Direction::kAscending ? "ascending" : "descending"}};
}

inline json to_json(const DetectionReport& r) {
  return {{"ranking", to_json(r.ranking)},
          {"fraction_detected_curve", r.fraction_detected_curve},
          {"auc_roc", r.auc_roc},
          {"noisy_mask", r.noisy_mask}};
}

// step,value rows; step = number of demonstrations checked.
inline std::string curve_csv(const std::vector<double>& curve) {
  std::string out = "step,value\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out += std::to_string(k) + "," + format_double(curve[k]) + "\n";
  }
  return out;
}

inline json to_json(const CurationPlan& p) {
  json per_validation = json::array();
  for (Eigen::Index i = 0; i < p.scores_per_validation.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(p.scores_per_validation.cols()));
    for (Eigen::Index v = 0; v < p.scores_per_validation.cols(); ++v) {
      row[static_cast<std::size_t>(v)] = p.scores_per_validation(i, v);
    }
    per_validation.push_back(std::move(row));
  }
  const auto removed = p.removed();
  return {{"k", p.k},
          {"removal_order", p.removal_order},
          {"removed", std::vector<std::size_t>(removed.begin(), removed.end())},
          {"kept", p.kept()},
          {"summed_scores", p.summed_scores},
          {"scores_per_validation", std::move(per_validation)}};
}

inline std::string plan_csv(const CurationPlan& p) {
  std::string out = "position,index,summed_score,removed\n";
  for (std::size_t pos = 0; pos < p.removal_order.size(); ++pos) {
    const std::size_t i = p.removal_order[pos];
    out += std::to_string(pos) + "," + std::to_string(i) + "," + format_double(p.summed_scores[i]) +
           "," + (pos < p.k ? "1" : "0") + "\n";
  }
  return out;
}

inline json accuracy_to_json(const std::vector<MeanStderr>& curve) {
  json steps = json::array();
  for (std::size_t s = 0; s < curve.size(); ++s) {
    steps.push_back({{"step", s}, {"mean", curve[s].mean}, {"stderr", curve[s].std_error}});
  }
  return steps;
}

inline std::string accuracy_csv(const std::vector<MeanStderr>& curve) {
  std::string out = "step,mean,stderr\n";
  for (std::size_t s = 0; s < curve.size(); ++s) {
    out += std::to_string(s) + "," + format_double(curve[s].mean) + "," +
           format_double(curve[s].std_error) + "\n";
  }
  return out;
}

inline void write_scores(const ScoreVector& s, const std::filesystem::path& path,
                         OutputFormat format) {
  write_file(path, format == OutputFormat::kCsv ? scores_csv(s) : to_json(s).dump(2) + "\n");
}

inline void write_scores(const DetectionReport& r, const std::filesystem::path& path,
                         OutputFormat format) {
  write_file(path, format == OutputFormat::kCsv ? curve_csv(r.fraction_detected_curve)
                                                : to_json(r).dump(2) + "\n");
}

inline void write_scores(const CurationPlan& p, const std::filesystem::path& path,
                         OutputFormat format) {
  write_file(path, format == OutputFormat::kCsv ? plan_csv(p) : to_json(p).dump(2) + "\n");
}

}  // namespace icldetail
