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

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hiertool/hierarchy.hpp"

namespace hiertool {

// Pretrained word vectors; tokens lowercase-normalized, all vectors share
// `dim`. Immutable after load.
struct WordVectorTable {
  int dim = 0;
  std::unordered_map<std::string, std::vector<double>> entries;
};

// Parses the whitespace-separated text format `token v1 ... vd`. Strict: a
// malformed or dimension-inconsistent line is an error naming its line
// number. expected_dim 0 infers the dimension from the first entry.
WordVectorTable load_vectors(const std::string& path, int expected_dim = 0);

// Single-token labels resolve by lookup; multi-token labels (split on
// whitespace/underscores/hyphens, lowercased) average their token vectors.
// A missing token is an error naming that token.
std::vector<double> embed_label(const WordVectorTable& table,
                                const std::string& label);

// One row per category, canonical hierarchy order (level-major, file order
// within a level). Rows keep the table's raw dimension; adaptation to the
// model width is a learned projection inside the model.
struct QueryMatrix {
  int rows = 0;
  int dim = 0;
  std::vector<double> data;  // rows x dim, row-major

  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * dim; }
};

QueryMatrix build_query_matrix(const WordVectorTable& table, const Hierarchy& h);

}  // namespace hiertool
