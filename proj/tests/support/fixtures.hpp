#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hiericrf/taxonomy.hpp"

namespace fixtures {

// Taxonomy with counts[k] labels at level k+1; children are dealt to the
// previous level round-robin so every parent gets at least one.
inline std::string layered_taxonomy_json(const std::string& name, const std::vector<int>& counts) {
  nlohmann::json labels = nlohmann::json::array();
  std::vector<std::string> prev;
  for (std::size_t lvl = 0; lvl < counts.size(); ++lvl) {
    std::vector<std::string> cur;
    for (int i = 0; i < counts[lvl]; ++i) {
      std::string n = "L" + std::to_string(lvl + 1) + "_" + std::to_string(i);
      nlohmann::json l = {{"name", n}, {"level", lvl + 1}};
      l["parent"] = lvl == 0 ? nlohmann::json(nullptr) : nlohmann::json(prev[i % prev.size()]);
      labels.push_back(l);
      cur.push_back(n);
    }
    prev = cur;
  }
  return nlohmann::json{{"name", name}, {"labels", labels}}.dump();
}

inline hiericrf::Taxonomy layered_taxonomy(const std::vector<int>& counts) {
  return hiericrf::load_taxonomy(layered_taxonomy_json("layered", counts));
}

// A, X at level 1; B, C under A; Y under X.
inline hiericrf::Taxonomy small_two_level() {
  return hiericrf::load_taxonomy(R"({"name": "small", "labels": [
    {"name": "A", "level": 1, "parent": null},
    {"name": "X", "level": 1, "parent": null},
    {"name": "B", "level": 2, "parent": "A"},
    {"name": "C", "level": 2, "parent": "A"},
    {"name": "Y", "level": 2, "parent": "X"}]})");
}

// Miniature DBpedia-like three-level tree.
inline hiericrf::Taxonomy mini_dbpedia() {
  return hiericrf::load_taxonomy(R"({"name": "mini-dbpedia", "labels": [
    {"name": "Event", "level": 1, "parent": null},
    {"name": "Species", "level": 1, "parent": null},
    {"name": "NaturalEvent", "level": 2, "parent": "Event"},
    {"name": "SocietalEvent", "level": 2, "parent": "Event"},
    {"name": "Animal", "level": 2, "parent": "Species"},
    {"name": "Earthquake", "level": 3, "parent": "NaturalEvent"},
    {"name": "Election", "level": 3, "parent": "SocietalEvent"},
    {"name": "Mammal", "level": 3, "parent": "Animal"},
    {"name": "Bird", "level": 3, "parent": "Animal"}]})");
}

// Random taxonomy of the given depth: each non-leaf gets 1..max_children.
template <typename Rng>
hiericrf::Taxonomy random_taxonomy(Rng& rng, int depth, int roots, int max_children) {
  std::vector<hiericrf::LabelNode> nodes;
  std::vector<hiericrf::LabelId> frontier;
  for (int r = 0; r < roots; ++r) {
    nodes.push_back({static_cast<int>(nodes.size()), "r" + std::to_string(r), 1, std::nullopt});
    frontier.push_back(nodes.back().id);
  }
  for (int level = 2; level <= depth; ++level) {
    std::vector<hiericrf::LabelId> next;
    for (const auto p : frontier) {
      const int kids = 1 + static_cast<int>(rng.below(max_children));
      for (int c = 0; c < kids; ++c) {
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({id, "n" + std::to_string(id), level, p});
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  return hiericrf::Taxonomy::from_nodes("random", std::move(nodes));
}

}  // namespace fixtures
