// Copyright 2026 The hiertool Authors
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

#include "hiertool/dataset.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hiertool/error.hpp"
#include "hiertool/random.hpp"

namespace hiertool {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

CorrectnessVector correctness(const LabelPath& truth, const LabelPath& pred) {
  require(truth.length() == pred.length(),
          "correctness: path depth mismatch (" + std::to_string(truth.length()) +
              " vs " + std::to_string(pred.length()) + ")");
  CorrectnessVector v(truth.length());
  for (int i = 0; i < truth.length(); ++i)
    v[i] = truth.node_ids[i] == pred.node_ids[i] ? 1 : 0;
  return v;
}

int assign_level(const CorrectnessVector& v) {
  require(is_legal(v), "assign_level: correctness vector is not legal");
  int level = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) level = static_cast<int>(i);
  return level;
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += '/';
    out += n;
  }
  return out;
}

std::string correctness_string(const CorrectnessVector& v) {
  std::string s;
  for (auto b : v) s += b ? '1' : '0';
  return s;
}

ordered_json spec_to_json(const DistortionSpec& spec) {
  ordered_json d;
  d["types"] = spec.types();
  d["sigma"] = spec.sigma ? ordered_json(*spec.sigma) : ordered_json(nullptr);
  d["eta"] = spec.eta ? ordered_json(*spec.eta) : ordered_json(nullptr);
  d["lambda"] = spec.lambda_rate ? ordered_json(*spec.lambda_rate) : ordered_json(nullptr);
  d["delta"] = spec.delta ? ordered_json(*spec.delta) : ordered_json(nullptr);
  d["angle"] = spec.blur_angle ? ordered_json(*spec.blur_angle) : ordered_json(nullptr);
  return d;
}

DistortionSpec spec_from_json(const ordered_json& d) {
  DistortionSpec spec;
  if (!d.at("sigma").is_null()) spec.sigma = d.at("sigma").get<double>();
  if (!d.at("eta").is_null()) spec.eta = d.at("eta").get<int>();
  if (!d.at("lambda").is_null()) spec.lambda_rate = d.at("lambda").get<double>();
  if (!d.at("delta").is_null()) spec.delta = d.at("delta").get<double>();
  if (!d.at("angle").is_null()) spec.blur_angle = d.at("angle").get<double>();
  return spec;
}

struct ItemResult {
  std::optional<DatasetRecord> record;
  std::vector<std::string> diagnostics;
};

// One source image: retry loop of Algorithm-style sample/distort/annotate.
ItemResult process_source(const SourceSample& source, std::size_t index,
                          const AnnotatorOracle& annotator, const Hierarchy& h,
                          const BuildConfig& cfg, const std::string& out_dir) {
  require(source.truth.length() == h.depth(),
          "build_dataset: source '" + source.id + "' is not labeled to full depth");
  h.require_valid_path(source.truth);

  ItemResult result;
  RandomStream rng(cfg.seed ^ static_cast<uint64_t>(index));
  char id_buf[32];
  std::snprintf(id_buf, sizeof(id_buf), "img_%05zu", index);
  const std::string image_id = id_buf;

  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    DistortionSpec spec = sample_spec(rng, cfg.ranges);
    Image distorted = apply(source.image, spec, source.region, rng);
    LabelPath pred = annotator.predict(distorted);
    if (!h.valid_path(pred) || pred.length() != h.depth())
      fail("build_dataset: annotator returned an invalid path for '" +
           source.id + "'");
    CorrectnessVector bits = correctness(source.truth, pred);
    bool legal = is_legal(bits);

    std::ostringstream diag;
    diag << source.id << '\t' << attempt << '\t'
         << join_names(h.path_names(pred)) << '\t' << correctness_string(bits)
         << '\t' << (legal ? "accepted" : "rejected");
    result.diagnostics.push_back(diag.str());

    if (!legal) continue;

    int level = assign_level(bits);
    DatasetRecord rec;
    rec.image_id = image_id;
    rec.image_path = "images/" + image_id + ".png";
    rec.category_path = h.path_names(truncate_path(source.truth, level));
    rec.level_label = level;
    rec.spec = spec;
    rec.source_id = source.id;
    rec.attempts = attempt;
    write_png(distorted, (fs::path(out_dir) / rec.image_path).string());
    result.record = std::move(rec);
    return result;
  }
  result.diagnostics.push_back(source.id + "\t-\t-\t-\tskipped");
  return result;
}

}  // namespace

BuildOutput build_dataset(const std::vector<SourceSample>& sources,
                          const AnnotatorOracle& annotator, const Hierarchy& h,
                          const BuildConfig& cfg, const std::string& out_dir) {
  require(cfg.max_retries >= 1, "build_dataset: max_retries must be >= 1");
  fs::create_directories(fs::path(out_dir) / "images");

  std::vector<ItemResult> results(sources.size());
  int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < sources.size(); ++i)
      results[i] = process_source(sources[i], i, annotator, h, cfg, out_dir);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= sources.size()) return;
        try {
          results[i] = process_source(sources[i], i, annotator, h, cfg, out_dir);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Assemble in source order so the manifest is deterministic regardless of
  // completion order.
  BuildOutput out;
  for (auto& r : results) {
    if (r.record)
      out.records.push_back(std::move(*r.record));
    else
      ++out.skipped;
    for (auto& d : r.diagnostics) out.diagnostics.push_back(std::move(d));
  }
  return out;
}

LevelCounts summarize(const std::vector<DatasetRecord>& records,
                      const Hierarchy& h) {
  LevelCounts counts;
  counts.per_level.assign(h.depth(), 0);
  for (const auto& rec : records) {
    require(rec.level_label >= 0 && rec.level_label < h.depth(),
            "summarize: record level out of range");
    ++counts.per_level[rec.level_label];
    ++counts.total;
  }
  return counts;
}

std::string format_level_counts(const LevelCounts& counts, const Hierarchy& h) {
  std::ostringstream out;
  out << "level\tcount\n";
  for (int l = 0; l < h.depth(); ++l)
    out << h.level_names()[l] << '\t' << counts.per_level[l] << '\n';
  out << "total\t" << counts.total << '\n';
  return out.str();
}

std::string manifest_to_string(const std::vector<DatasetRecord>& records,
                               const Hierarchy& h) {
  std::ostringstream out;
  for (const auto& rec : records) {
    ordered_json j;
    j["image_id"] = rec.image_id;
    j["image_path"] = rec.image_path;
    j["category_path"] = rec.category_path;
    j["level_label"] = h.level_names().at(rec.level_label);
    j["distortion"] = spec_to_json(rec.spec);
    j["source_id"] = rec.source_id;
    j["attempts"] = rec.attempts;
    out << j.dump() << '\n';
  }
  return out.str();
}

void write_dataset_manifest(const std::vector<DatasetRecord>& records,
                            const std::string& path, const Hierarchy& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("manifest: cannot write '" + path + "'");
  out << manifest_to_string(records, h);
}

std::vector<DatasetRecord> load_dataset_manifest(const std::string& path,
                                                 const Hierarchy& h) {
  std::ifstream in(path);
  if (!in) fail("manifest: cannot open '" + path + "'");
  std::vector<DatasetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception& e) {
      fail("manifest: bad JSON at line " + std::to_string(line_no) + ": " +
           e.what());
    }
    DatasetRecord rec;
    rec.image_id = j.at("image_id").get<std::string>();
    rec.image_path = j.at("image_path").get<std::string>();
    rec.category_path = j.at("category_path").get<std::vector<std::string>>();
    rec.level_label = h.level_index(j.at("level_label").get<std::string>());
    rec.spec = spec_from_json(j.at("distortion"));
    rec.source_id = j.at("source_id").get<std::string>();
    rec.attempts = j.at("attempts").get<int>();
    require(static_cast<int>(rec.category_path.size()) == rec.level_label + 1,
            "manifest: category path length disagrees with level at line " +
                std::to_string(line_no));
    h.path_from_names(rec.category_path);  // validates
    records.push_back(std::move(rec));
  }
  return records;
}

void write_sources(const std::vector<SourceSample>& sources,
                   const std::string& dir, const Hierarchy& h) {
  fs::create_directories(fs::path(dir) / "images");
  std::ofstream out(fs::path(dir) / "sources.jsonl", std::ios::binary);
  if (!out) fail("sources: cannot write under '" + dir + "'");
  for (const auto& s : sources) {
    std::string rel = "images/" + s.id + ".png";
    write_png(s.image, (fs::path(dir) / rel).string());
    ordered_json j;
    j["image_id"] = s.id;
    j["image_path"] = rel;
    j["category_path"] = h.path_names(s.truth);
    j["bbox"] = {s.region.x, s.region.y, s.region.w, s.region.h};
    ordered_json parts = ordered_json::array();
    for (const auto& p : s.region.parts) parts.push_back({p.name, p.x, p.y});
    j["parts"] = parts;
    out << j.dump() << '\n';
  }
}

std::vector<SourceSample> load_sources(const std::string& dir,
                                       const Hierarchy& h) {
  fs::path manifest = fs::path(dir) / "sources.jsonl";
  std::ifstream in(manifest);
  if (!in) fail("sources: cannot open '" + manifest.string() + "'");
  std::vector<SourceSample> sources;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line);
    SourceSample s;
    s.id = j.at("image_id").get<std::string>();
    s.image = read_png((fs::path(dir) / j.at("image_path").get<std::string>()).string());
    s.truth = h.path_from_names(j.at("category_path").get<std::vector<std::string>>());
    auto bbox = j.at("bbox");
    s.region.x = bbox.at(0).get<double>();
    s.region.y = bbox.at(1).get<double>();
    s.region.w = bbox.at(2).get<double>();
    s.region.h = bbox.at(3).get<double>();
    for (const auto& p : j.at("parts"))
      s.region.parts.push_back(PartPoint{p.at(0).get<std::string>(),
                                         p.at(1).get<double>(),
                                         p.at(2).get<double>()});
    sources.push_back(std::move(s));
  }
  return sources;
}

}  // namespace hiertool
