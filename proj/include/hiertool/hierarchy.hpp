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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace hiertool {

using NodeId = int;

struct HierarchyNode {
  NodeId id = -1;
  std::string name;
  NodeId parent = -1;  // -1 only for the internal virtual root
  int level = -1;      // 0-based; the virtual root sits at -1
  std::vector<NodeId> children;
};

// A root-to-node category path: node ids from level 0 downward. Length k
// means the sample is labeled to level k-1 (shorter than full depth when the
// finer levels are unknown).
struct LabelPath {
  std::vector<NodeId> node_ids;

  LabelPath() = default;
  explicit LabelPath(std::vector<NodeId> ids) : node_ids(std::move(ids)) {}

  int length() const { return static_cast<int>(node_ids.size()); }
  int level() const { return length() - 1; }
  bool operator==(const LabelPath& o) const = default;
};

// Per-level correctness bits; 1 = correct classification at that level.
using CorrectnessVector = std::vector<uint8_t>;

// Sorted, duplicate-free set of node ids.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<NodeId> ids);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(NodeId id) const;
  const std::vector<NodeId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  bool operator==(const NodeSet& o) const = default;

 private:
  std::vector<NodeId> ids_;
};

// Rooted, level-stratified label tree. A virtual root above the top level is
// stored internally (top-level categories may form a forest in the file) but
// is never exposed through counts, categories, paths, or metric sets.
//
// Immutable after load; all members are safe for concurrent reads.
class Hierarchy {
 public:
  // File format: UTF-8 lines `name<TAB>parent_name`, top-level lines use
  // parent `-`. Blank lines and `#` comments are ignored. An optional
  // `#!levels name0 name1 ...` directive names the levels.
  static Hierarchy load(std::istream& in);
  static Hierarchy load_file(const std::string& path);
  static Hierarchy from_string(const std::string& text);
  std::string serialize() const;

  int depth() const { return depth_; }
  int node_count() const { return static_cast<int>(nodes_.size()) - 1; }

  const HierarchyNode& node(NodeId id) const;
  int level_of(NodeId id) const { return node(id).level; }
  const std::string& name_of(NodeId id) const { return node(id).name; }
  // -1 when no node has this name.
  NodeId find(const std::string& name) const;
  const std::vector<NodeId>& top_level() const;
  const std::vector<std::string>& level_names() const { return level_names_; }
  int level_index(const std::string& level_name) const;

  // Canonical category ordering: level-major, file order within a level.
  // This is the layout of query matrices and score vectors.
  const std::vector<NodeId>& categories() const { return categories_; }
  // Half-open range of positions in categories() holding the given level.
  std::pair<int, int> level_slice(int level) const;
  // Position of a node in categories().
  int category_index(NodeId id) const;

  bool valid_path(const LabelPath& p) const;
  void require_valid_path(const LabelPath& p) const;
  LabelPath path_to(NodeId id) const;
  LabelPath path_from_names(const std::vector<std::string>& names) const;
  std::vector<std::string> path_names(const LabelPath& p) const;

 private:
  Hierarchy() = default;

  std::vector<HierarchyNode> nodes_;  // index == id; id 0 is the virtual root
  std::unordered_map<std::string, NodeId> by_name_;
  std::vector<std::string> level_names_;
  std::vector<NodeId> categories_;
  std::vector<int> category_index_;        // node id -> position in categories_
  std::vector<std::pair<int, int>> level_slices_;
  int depth_ = 0;
};

// The set of all nodes on the path (a root-to-node path is its own ancestor
// closure).
NodeSet ancestor_closure(const Hierarchy& h, const LabelPath& p);

// The correctness patterns consistent with the hierarchical constraint for
// the given depth, finest first: all-ones, then each shorter all-one prefix
// zero-padded. The all-zero vector is excluded.
std::vector<CorrectnessVector> legal_set(int depth);

// True iff v is in legal_set(len(v)): v[0] == 1 and monotonically
// non-increasing.
bool is_legal(const CorrectnessVector& v);

// Prefix of p with length level+1; level must be < length(p).
LabelPath truncate_path(const LabelPath& p, int level);

}  // namespace hiertool
