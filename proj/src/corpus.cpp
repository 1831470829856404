#include "hiericrf/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hiericrf/error.hpp"

namespace hiericrf {

using nlohmann::json;

std::vector<Example> load_corpus(const std::string& path, const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus '" + path + "'");
  std::vector<Example> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string() || !j.contains("path") || !j["path"].is_array()) {
      throw ParseError(where + ": needs string 'id', string 'text' and array 'path'");
    }
    Example ex;
    ex.id = j["id"].get<std::string>();
    ex.text = j["text"].get<std::string>();
    for (const auto& name : j["path"]) {
      if (!name.is_string()) throw ParseError(where + ": path entries must be label names");
      ex.path.push_back(tax.id_of(name.get<std::string>()));
    }
    if (!tax.path_index(ex.path)) {
      throw ValidationError(where + ": path is not a root-to-leaf path of the taxonomy");
    }
    if (!seen.insert(ex.id).second) throw ValidationError(where + ": duplicate id '" + ex.id + "'");
    out.push_back(std::move(ex));
  }
  return out;
}

void write_corpus(const std::string& path, const std::vector<Example>& examples,
                  const Taxonomy& tax) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  for (const Example& ex : examples) {
    json names = json::array();
    for (const LabelId v : ex.path) names.push_back(tax.node(v).name);
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    j["text"] = ex.text;
    j["path"] = std::move(names);
    out << j.dump() << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace hiericrf
