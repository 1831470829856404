#pragma once

#include <string>
#include <vector>

#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

struct Example {
  std::string id;
  std::string text;
  LabelPath path;  // one label per level, level 1 first

  friend bool operator==(const Example&, const Example&) = default;
};

// JSONL lines {"id": str, "text": str, "path": [level-1 name, ..., level-D name]}.
// Every path must be a root-to-leaf path of tax and ids must be unique.
std::vector<Example> load_corpus(const std::string& path, const Taxonomy& tax);
void write_corpus(const std::string& path, const std::vector<Example>& examples,
                  const Taxonomy& tax);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace hiericrf
