#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hiericrf {

using LabelId = int;
using LabelPath = std::vector<LabelId>;

struct LabelNode {
  LabelId id = 0;
  std::string name;
  int level = 1;
  std::optional<LabelId> parent;
};

class ChainSchedule;

// Immutable label hierarchy. Level-1 nodes hang off an implicit virtual
// root that is never materialized. Every leaf sits at the deepest level.
class Taxonomy {
 public:
  // Validates and indexes the nodes. Ids must be dense and in order.
  static Taxonomy from_nodes(std::string name, std::vector<LabelNode> nodes);

  const std::string& name() const noexcept { return name_; }
  int depth() const noexcept { return depth_; }
  int label_count() const noexcept { return static_cast<int>(nodes_.size()); }

  const std::vector<LabelNode>& nodes() const noexcept { return nodes_; }
  const LabelNode& node(LabelId id) const;
  int level(LabelId id) const { return node(id).level; }
  const std::vector<LabelId>& children(LabelId id) const;
  std::vector<LabelId> labels_at_level(int level) const;

  LabelId id_of(std::string_view name) const;
  std::optional<LabelId> find(std::string_view name) const;

  // Root-to-leaf paths in leaf id order; each has exactly depth() entries.
  const std::vector<LabelPath>& leaf_paths() const noexcept {
    return leaf_paths_;
  }
  // Index into leaf_paths() for a full path, if it is one.
  std::optional<std::size_t> path_index(const LabelPath& path) const;
  // Unique root-to-leaf-or-self prefix ending at id (ancestors then id).
  LabelPath path_to(LabelId id) const;
  bool is_ancestor(LabelId ancestor, LabelId id) const;

  // Stable 64-bit digest of (names, levels, parents) in id order.
  std::uint64_t fingerprint() const;

 private:
  std::string name_;
  std::vector<LabelNode> nodes_;
  std::vector<std::vector<LabelId>> children_;
  std::unordered_map<std::string, LabelId> by_name_;
  std::vector<LabelPath> leaf_paths_;
  int depth_ = 0;
};

// Parses the taxonomy JSON document:
//   {"name": str, "labels": [{"name": str, "level": int, "parent": str|null}]}
Taxonomy load_taxonomy(std::string_view json_text);
Taxonomy load_taxonomy_file(const std::string& path);
std::string serialize_taxonomy(const Taxonomy& tax);

// Ancestors of id ordered from level 1 down to level(id) - 1.
std::vector<LabelId> ancestors(const Taxonomy& tax, LabelId id);

using LevelPair = std::pair<int, int>;

// Consecutive level pairs visited by the schedule.
std::set<LevelPair> legal_level_pairs(const Taxonomy& tax,
                                      const ChainSchedule& schedule);

}  // namespace hiericrf
