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

#include "hiertool/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hiertool/error.hpp"

namespace hiertool {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> label_tokens(const std::string& label) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : label) {
    if (c == ' ' || c == '\t' || c == '_' || c == '-') {
      if (!cur.empty()) tokens.push_back(lower(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(lower(cur));
  return tokens;
}

}  // namespace

WordVectorTable load_vectors(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) fail("word vectors: cannot open '" + path + "'");

  WordVectorTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (token.empty())
      fail("word vectors: malformed line " + std::to_string(line_no));
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (!ls.eof())
      fail("word vectors: malformed value on line " + std::to_string(line_no));
    if (vec.empty())
      fail("word vectors: no values on line " + std::to_string(line_no));
    if (table.dim == 0) {
      table.dim = static_cast<int>(vec.size());
      if (expected_dim > 0 && table.dim != expected_dim)
        fail("word vectors: dimension " + std::to_string(table.dim) +
             " does not match expected " + std::to_string(expected_dim));
    } else if (static_cast<int>(vec.size()) != table.dim) {
      fail("word vectors: line " + std::to_string(line_no) + " has " +
           std::to_string(vec.size()) + " values, expected " +
           std::to_string(table.dim));
    }
    // Map semantics; first occurrence wins on duplicates.
    table.entries.emplace(lower(token), std::move(vec));
  }
  if (table.entries.empty()) fail("word vectors: no valid entries in '" + path + "'");
  return table;
}

std::vector<double> embed_label(const WordVectorTable& table,
                                const std::string& label) {
  auto tokens = label_tokens(label);
  require(!tokens.empty(), "embed_label: empty label");
  std::vector<double> acc(table.dim, 0.0);
  for (const auto& tok : tokens) {
    auto it = table.entries.find(tok);
    if (it == table.entries.end())
      fail("embed_label: token '" + tok + "' of label '" + label +
           "' is out of vocabulary");
    for (int i = 0; i < table.dim; ++i) acc[i] += it->second[i];
  }
  for (double& v : acc) v /= static_cast<double>(tokens.size());
  return acc;
}

QueryMatrix build_query_matrix(const WordVectorTable& table, const Hierarchy& h) {
  QueryMatrix q;
  q.rows = static_cast<int>(h.categories().size());
  q.dim = table.dim;
  q.data.reserve(static_cast<std::size_t>(q.rows) * q.dim);
  for (NodeId id : h.categories()) {
    auto vec = embed_label(table, h.name_of(id));
    q.data.insert(q.data.end(), vec.begin(), vec.end());
  }
  return q;
}

}  // namespace hiertool
