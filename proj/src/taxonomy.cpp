#include "hiericrf/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hiericrf/chain.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/hash.hpp"

namespace hiericrf {

using nlohmann::json;

Taxonomy Taxonomy::from_nodes(std::string name, std::vector<LabelNode> nodes) {
  if (nodes.empty()) throw ValidationError("taxonomy has no labels");

  Taxonomy tax;
  tax.name_ = std::move(name);
  const auto m = static_cast<LabelId>(nodes.size());

  for (LabelId id = 0; id < m; ++id) {
    const LabelNode& n = nodes[id];
    if (n.id != id) throw ValidationError("label ids must be dense and ordered");
    if (n.name.empty()) throw ValidationError("label " + std::to_string(id) + " has an empty name");
    if (!tax.by_name_.emplace(n.name, id).second) {
      throw ValidationError("duplicate label name '" + n.name + "'");
    }
    if (n.level < 1) {
      throw ValidationError("label '" + n.name + "' has level < 1");
    }
    tax.depth_ = std::max(tax.depth_, n.level);
  }

  tax.children_.assign(nodes.size(), {});
  for (const LabelNode& n : nodes) {
    if (n.level == 1) {
      if (n.parent) {
        throw ValidationError("level-1 label '" + n.name + "' must not have a parent");
      }
      continue;
    }
    if (!n.parent) {
      throw ValidationError("label '" + n.name + "' at level " +
                            std::to_string(n.level) + " has no parent");
    }
    const LabelId p = *n.parent;
    if (p < 0 || p >= m) throw ValidationError("label '" + n.name + "' has an unknown parent");
    // Levels strictly decrease towards the root, so no cycle can survive this.
    if (nodes[p].level != n.level - 1) {
      throw ValidationError("label '" + n.name + "' at level " + std::to_string(n.level) +
                            " has parent '" + nodes[p].name + "' at level " +
                            std::to_string(nodes[p].level) + " (cycle or level gap)");
    }
    tax.children_[p].push_back(n.id);
  }

  std::vector<int> per_level(tax.depth_ + 1, 0);
  for (const LabelNode& n : nodes) ++per_level[n.level];
  for (int level = 1; level <= tax.depth_; ++level) {
    if (per_level[level] == 0) {
      throw ValidationError("level gap: level " + std::to_string(level) + " has no labels");
    }
  }

  for (const LabelNode& n : nodes) {
    if (n.level < tax.depth_ && tax.children_[n.id].empty()) {
      throw ValidationError("label '" + n.name + "' is a leaf at level " +
                            std::to_string(n.level) + " but the taxonomy depth is " +
                            std::to_string(tax.depth_) + " (non-mandatory leaf)");
    }
  }

  tax.nodes_ = std::move(nodes);
  for (const LabelNode& n : tax.nodes_) {
    if (n.level == tax.depth_) tax.leaf_paths_.push_back(tax.path_to(n.id));
  }
  return tax;
}

const LabelNode& Taxonomy::node(LabelId id) const {
  if (id < 0 || id >= label_count()) {
    throw UnknownLabel("label id " + std::to_string(id) + " out of range");
  }
  return nodes_[id];
}

const std::vector<LabelId>& Taxonomy::children(LabelId id) const {
  node(id);
  return children_[id];
}

std::vector<LabelId> Taxonomy::labels_at_level(int level) const {
  std::vector<LabelId> out;
  for (const LabelNode& n : nodes_) {
    if (n.level == level) out.push_back(n.id);
  }
  return out;
}

std::optional<LabelId> Taxonomy::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

LabelId Taxonomy::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw UnknownLabel("no label named '" + std::string(name) + "'");
}

std::optional<std::size_t> Taxonomy::path_index(const LabelPath& path) const {
  if (static_cast<int>(path.size()) != depth_) return std::nullopt;
  for (std::size_t i = 0; i < leaf_paths_.size(); ++i) {
    if (leaf_paths_[i] == path) return i;
  }
  return std::nullopt;
}

LabelPath Taxonomy::path_to(LabelId id) const {
  LabelPath path;
  std::optional<LabelId> cur = id;
  while (cur) {
    path.push_back(*cur);
    cur = node(*cur).parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool Taxonomy::is_ancestor(LabelId ancestor, LabelId id) const {
  std::optional<LabelId> cur = node(id).parent;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_[*cur].parent;
  }
  return false;
}

std::uint64_t Taxonomy::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const LabelNode& n : nodes_) {
    h = fnv1a64(n.name, h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(std::to_string(n.level), h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(n.parent ? std::to_string(*n.parent) : "-", h);
    h = fnv1a64(std::string_view("\x1e", 1), h);
  }
  return h;
}

Taxonomy load_taxonomy(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("taxonomy is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array()) {
    throw ParseError("taxonomy must be an object with a 'labels' array");
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("taxonomy 'name' must be a string");
    name = doc["name"].get<std::string>();
  }

  const json& labels = doc["labels"];
  std::unordered_map<std::string, LabelId> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const json& l = labels[i];
    if (!l.is_object() || !l.contains("name") || !l["name"].is_string() ||
        !l.contains("level") || !l["level"].is_number_integer()) {
      throw ParseError("label #" + std::to_string(i) + " needs a string 'name' and integer 'level'");
    }
    if (l.contains("parent") && !l["parent"].is_null() && !l["parent"].is_string()) {
      throw ParseError("label #" + std::to_string(i) + " 'parent' must be a string or null");
    }
    const auto label_name = l["name"].get<std::string>();
    if (!ids.emplace(label_name, static_cast<LabelId>(i)).second) {
      throw ValidationError("duplicate label name '" + label_name + "'");
    }
  }

  std::vector<LabelNode> nodes;
  nodes.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const json& l = labels[i];
    LabelNode n;
    n.id = static_cast<LabelId>(i);
    n.name = l["name"].get<std::string>();
    n.level = l["level"].get<int>();
    if (l.contains("parent") && l["parent"].is_string()) {
      const auto parent_name = l["parent"].get<std::string>();
      const auto it = ids.find(parent_name);
      if (it == ids.end()) {
        throw ValidationError("label '" + n.name + "' names unknown parent '" + parent_name + "'");
      }
      n.parent = it->second;
    }
    nodes.push_back(std::move(n));
  }
  return Taxonomy::from_nodes(std::move(name), std::move(nodes));
}

Taxonomy load_taxonomy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open taxonomy file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_taxonomy(buf.str());
}

std::string serialize_taxonomy(const Taxonomy& tax) {
  json labels = json::array();
  for (const LabelNode& n : tax.nodes()) {
    json l = {{"name", n.name}, {"level", n.level}};
    l["parent"] = n.parent ? json(tax.node(*n.parent).name) : json(nullptr);
    labels.push_back(std::move(l));
  }
  json doc = {{"name", tax.name()}, {"labels", std::move(labels)}};
  return doc.dump(2) + "\n";
}

std::vector<LabelId> ancestors(const Taxonomy& tax, LabelId id) {
  LabelPath path = tax.path_to(id);
  path.pop_back();
  return path;
}

std::set<LevelPair> legal_level_pairs(const Taxonomy& /*tax*/,
                                      const ChainSchedule& schedule) {
  std::set<LevelPair> pairs;
  const auto& levels = schedule.levels();
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    pairs.emplace(levels[i], levels[i + 1]);
  }
  return pairs;
}

}  // namespace hiericrf
