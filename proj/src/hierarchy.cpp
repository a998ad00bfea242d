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

#include "hiertool/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "hiertool/error.hpp"

namespace hiertool {

namespace {

constexpr const char* kLevelsDirective = "#!levels";

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void check_name(const std::string& name, int line_no) {
  if (name.empty())
    fail("hierarchy: empty node name at line " + std::to_string(line_no));
  if (name == "-" || name == "None")
    fail("hierarchy: reserved node name '" + name + "' at line " +
         std::to_string(line_no));
  if (name.find('/') != std::string::npos)
    fail("hierarchy: node name '" + name + "' contains '/' (line " +
         std::to_string(line_no) + ")");
}

}  // namespace

NodeSet::NodeSet(std::vector<NodeId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool NodeSet::contains(NodeId id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

Hierarchy Hierarchy::load(std::istream& in) {
  Hierarchy h;
  h.nodes_.push_back(HierarchyNode{0, "", -1, -1, {}});

  std::vector<std::pair<std::string, std::string>> rows;  // (name, parent)
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.rfind(kLevelsDirective, 0) == 0) {
      std::istringstream ls(line.substr(std::string(kLevelsDirective).size()));
      std::string name;
      h.level_names_.clear();
      while (ls >> name) h.level_names_.push_back(name);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      fail("hierarchy: expected `name<TAB>parent` at line " +
           std::to_string(line_no));
    std::string name = line.substr(0, tab);
    std::string parent = line.substr(tab + 1);
    check_name(name, line_no);
    if (parent.empty())
      fail("hierarchy: empty parent name at line " + std::to_string(line_no));
    if (h.by_name_.count(name))
      fail("hierarchy: duplicate node name '" + name + "' at line " +
           std::to_string(line_no));
    NodeId id = static_cast<NodeId>(h.nodes_.size());
    h.nodes_.push_back(HierarchyNode{id, name, -1, -1, {}});
    h.by_name_[name] = id;
    rows.emplace_back(name, parent);
  }
  if (rows.empty()) fail("hierarchy: document defines no nodes");

  // Resolve parents by name; `-` hangs the node under the virtual root.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    NodeId id = static_cast<NodeId>(i + 1);
    const std::string& parent = rows[i].second;
    if (parent == "-") {
      h.nodes_[id].parent = 0;
    } else {
      auto it = h.by_name_.find(parent);
      if (it == h.by_name_.end())
        fail("hierarchy: dangling parent '" + parent + "' for node '" +
             rows[i].first + "'");
      if (it->second == id)
        fail("hierarchy: cycle detected at node '" + rows[i].first + "'");
      h.nodes_[id].parent = it->second;
    }
    h.nodes_[h.nodes_[id].parent].children.push_back(id);
  }

  // Level assignment by BFS from the virtual root. Nodes that stay
  // unreachable sit on a cycle (their parents all exist).
  std::deque<NodeId> queue{0};
  int reached = 0;
  while (!queue.empty()) {
    NodeId id = queue.front();
    queue.pop_front();
    ++reached;
    for (NodeId c : h.nodes_[id].children) {
      h.nodes_[c].level = h.nodes_[id].level + 1;
      h.depth_ = std::max(h.depth_, h.nodes_[c].level + 1);
      queue.push_back(c);
    }
  }
  if (reached != static_cast<int>(h.nodes_.size())) {
    for (const auto& n : h.nodes_)
      if (n.id != 0 && n.level < 0)
        fail("hierarchy: cycle detected at node '" + n.name + "'");
  }

  if (h.level_names_.empty()) {
    for (int l = 0; l < h.depth_; ++l)
      h.level_names_.push_back("level_" + std::to_string(l));
  } else if (static_cast<int>(h.level_names_.size()) != h.depth_) {
    fail("hierarchy: #!levels names " + std::to_string(h.level_names_.size()) +
         " levels but the tree has depth " + std::to_string(h.depth_));
  }

  // Canonical category ordering: level-major, file (id) order within level.
  h.category_index_.assign(h.nodes_.size(), -1);
  for (int l = 0; l < h.depth_; ++l) {
    int begin = static_cast<int>(h.categories_.size());
    for (const auto& n : h.nodes_) {
      if (n.level == l) {
        h.category_index_[n.id] = static_cast<int>(h.categories_.size());
        h.categories_.push_back(n.id);
      }
    }
    h.level_slices_.emplace_back(begin, static_cast<int>(h.categories_.size()));
  }
  return h;
}

Hierarchy Hierarchy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("hierarchy: cannot open '" + path + "'");
  return load(in);
}

Hierarchy Hierarchy::from_string(const std::string& text) {
  std::istringstream in(text);
  return load(in);
}

std::string Hierarchy::serialize() const {
  std::ostringstream out;
  out << kLevelsDirective;
  for (const auto& n : level_names_) out << ' ' << n;
  out << '\n';
  for (const auto& n : nodes_) {
    if (n.id == 0) continue;
    out << n.name << '\t' << (n.parent == 0 ? "-" : nodes_[n.parent].name)
        << '\n';
  }
  return out.str();
}

const HierarchyNode& Hierarchy::node(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    fail("hierarchy: node id " + std::to_string(id) + " out of range");
  return nodes_[id];
}

NodeId Hierarchy::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

const std::vector<NodeId>& Hierarchy::top_level() const {
  return nodes_[0].children;
}

int Hierarchy::level_index(const std::string& level_name) const {
  for (std::size_t i = 0; i < level_names_.size(); ++i)
    if (level_names_[i] == level_name) return static_cast<int>(i);
  fail("hierarchy: unknown level name '" + level_name + "'");
}

std::pair<int, int> Hierarchy::level_slice(int level) const {
  require(level >= 0 && level < depth_,
          "hierarchy: level " + std::to_string(level) + " out of range");
  return level_slices_[level];
}

int Hierarchy::category_index(NodeId id) const {
  const auto& n = node(id);
  require(n.id != 0, "hierarchy: the virtual root has no category index");
  return category_index_[id];
}

bool Hierarchy::valid_path(const LabelPath& p) const {
  if (p.node_ids.empty() || p.length() > depth_) return false;
  for (int i = 0; i < p.length(); ++i) {
    NodeId id = p.node_ids[i];
    if (id <= 0 || id >= static_cast<NodeId>(nodes_.size())) return false;
    if (nodes_[id].level != i) return false;
    if (i > 0 && nodes_[id].parent != p.node_ids[i - 1]) return false;
  }
  return true;
}

void Hierarchy::require_valid_path(const LabelPath& p) const {
  if (!valid_path(p)) {
    std::string names;
    for (NodeId id : p.node_ids) {
      if (!names.empty()) names += '/';
      names += (id > 0 && id < static_cast<NodeId>(nodes_.size()))
                   ? nodes_[id].name
                   : ("<" + std::to_string(id) + ">");
    }
    fail("hierarchy: invalid label path '" + names + "'");
  }
}

LabelPath Hierarchy::path_to(NodeId id) const {
  std::vector<NodeId> ids;
  NodeId cur = node(id).id;
  while (cur != 0) {
    ids.push_back(cur);
    cur = nodes_[cur].parent;
  }
  std::reverse(ids.begin(), ids.end());
  return LabelPath(std::move(ids));
}

LabelPath Hierarchy::path_from_names(const std::vector<std::string>& names) const {
  LabelPath p;
  for (const auto& name : names) {
    NodeId id = find(name);
    if (id < 0) fail("hierarchy: unknown category '" + name + "'");
    p.node_ids.push_back(id);
  }
  require_valid_path(p);
  return p;
}

std::vector<std::string> Hierarchy::path_names(const LabelPath& p) const {
  require_valid_path(p);
  std::vector<std::string> names;
  names.reserve(p.node_ids.size());
  for (NodeId id : p.node_ids) names.push_back(nodes_[id].name);
  return names;
}

NodeSet ancestor_closure(const Hierarchy& h, const LabelPath& p) {
  h.require_valid_path(p);
  return NodeSet(p.node_ids);
}

std::vector<CorrectnessVector> legal_set(int depth) {
  require(depth >= 1, "legal_set: depth must be positive");
  std::vector<CorrectnessVector> out;
  for (int ones = depth; ones >= 1; --ones) {
    CorrectnessVector v(depth, 0);
    std::fill(v.begin(), v.begin() + ones, 1);
    out.push_back(std::move(v));
  }
  return out;
}

bool is_legal(const CorrectnessVector& v) {
  if (v.empty() || v[0] != 1) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

LabelPath truncate_path(const LabelPath& p, int level) {
  require(level >= 0 && level < p.length(),
          "truncate_path: level " + std::to_string(level) +
              " out of range for path of length " + std::to_string(p.length()));
  return LabelPath(std::vector<NodeId>(p.node_ids.begin(),
                                       p.node_ids.begin() + level + 1));
}

}  // namespace hiertool
