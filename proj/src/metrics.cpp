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

#include "hiertool/metrics.hpp"

#include <fstream>
#include <sstream>

#include "hiertool/error.hpp"

namespace hiertool {

namespace {

// Sorted-merge intersection count.
int intersection_size(const NodeSet& a, const NodeSet& b) {
  const auto& x = a.ids();
  const auto& y = b.ids();
  std::size_t i = 0, j = 0;
  int n = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

// Kahan-compensated accumulator; keeps dataset means deterministic.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    double y = v - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

int sdl(const NodeSet& truth, const NodeSet& pred) {
  int inter = intersection_size(truth, pred);
  return static_cast<int>(truth.size()) + static_cast<int>(pred.size()) -
         2 * inter;
}

double hierarchical_precision(const NodeSet& truth, const NodeSet& pred) {
  require(!pred.empty(), "hierarchical_precision: empty prediction set");
  return static_cast<double>(intersection_size(truth, pred)) /
         static_cast<double>(pred.size());
}

double hierarchical_recall(const NodeSet& truth, const NodeSet& pred) {
  require(!truth.empty(), "hierarchical_recall: empty truth set");
  return static_cast<double>(intersection_size(truth, pred)) /
         static_cast<double>(truth.size());
}

MetricReport evaluate_manifest(const std::vector<LabelPath>& truths,
                               const std::vector<LabelPath>& preds,
                               const Hierarchy& h) {
  require(truths.size() == preds.size(),
          "evaluate_manifest: truth/prediction length mismatch (" +
              std::to_string(truths.size()) + " vs " +
              std::to_string(preds.size()) + ")");
  MetricReport report;
  report.per_sample.reserve(truths.size());
  KahanSum s_sdl, s_ph, s_rh;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    NodeSet t = ancestor_closure(h, truths[i]);
    NodeSet p = ancestor_closure(h, preds[i]);
    SampleMetrics m;
    m.sdl = sdl(t, p);
    m.ph = hierarchical_precision(t, p);
    m.rh = hierarchical_recall(t, p);
    s_sdl.add(m.sdl);
    s_ph.add(m.ph);
    s_rh.add(m.rh);
    report.per_sample.push_back(m);
  }
  double n = static_cast<double>(report.per_sample.size());
  if (n > 0) {
    report.sdl_mean = s_sdl.sum / n;
    report.ph_mean = s_ph.sum / n;
    report.rh_mean = s_rh.sum / n;
  }
  return report;
}

std::string label_manifest_line(const std::string& image_id,
                                const LabelPath& path, const Hierarchy& h) {
  auto names = h.path_names(path);
  std::string line = image_id;
  line += '\t';
  for (int l = 0; l < h.depth(); ++l) {
    if (l > 0) line += '/';
    line += l < static_cast<int>(names.size()) ? names[l] : "None";
  }
  return line;
}

std::vector<LabelRecord> load_label_manifest(const std::string& path,
                                             const Hierarchy& h) {
  std::ifstream in(path);
  if (!in) fail("label manifest: cannot open '" + path + "'");
  std::vector<LabelRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      fail("label manifest: expected `id<TAB>path` at line " +
           std::to_string(line_no));
    LabelRecord rec;
    rec.image_id = line.substr(0, tab);
    std::string rest = line.substr(tab + 1);
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
      auto slash = rest.find('/', start);
      segments.push_back(rest.substr(start, slash - start));
      if (slash == std::string::npos) break;
      start = slash + 1;
    }
    if (static_cast<int>(segments.size()) != h.depth())
      fail("label manifest: line " + std::to_string(line_no) + " has " +
           std::to_string(segments.size()) + " segments, expected " +
           std::to_string(h.depth()));
    std::vector<std::string> names;
    bool truncated = false;
    for (const auto& seg : segments) {
      if (seg == "None") {
        truncated = true;
        continue;
      }
      if (truncated)
        fail("label manifest: category after None at line " +
             std::to_string(line_no));
      names.push_back(seg);
    }
    if (names.empty())
      fail("label manifest: all-None path at line " + std::to_string(line_no));
    rec.path = h.path_from_names(names);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_label_manifest(const std::vector<LabelRecord>& records,
                          const std::string& path, const Hierarchy& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("label manifest: cannot write '" + path + "'");
  for (const auto& rec : records)
    out << label_manifest_line(rec.image_id, rec.path, h) << '\n';
}

}  // namespace hiertool
