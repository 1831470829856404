#include "hiericrf/synthgen.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include "hiericrf/error.hpp"
#include "hiericrf/rng.hpp"

namespace hiericrf {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::size_t kSyllables = 14 * 5;

// Bijective index -> three-syllable pseudo-word.
std::string pseudo_word(std::size_t index) {
  std::string w;
  for (int s = 0; s < 3; ++s) {
    const std::size_t syl = index % kSyllables;
    index /= kSyllables;
    w += kConsonants[syl / kVowels.size()];
    w += kVowels[syl % kVowels.size()];
  }
  return w;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.branching < 1) throw InvalidSpec("branching must be >= 1");
  if (spec.depth < 1) throw InvalidSpec("depth must be >= 1");
  if (spec.signature_tokens < 1) throw InvalidSpec("signature tokens must be >= 1");
  if (spec.doc_tokens < 1) throw InvalidSpec("document length must be >= 1");
  if (spec.docs_per_path < 1) throw InvalidSpec("documents per path must be >= 1");
  if (!(spec.noise >= 0.0 && spec.noise <= 1.0)) throw InvalidSpec("noise must be in [0, 1]");
  const double leaves = std::pow(static_cast<double>(spec.branching), spec.depth);
  if (leaves > 1e5) throw InvalidSpec("taxonomy too large (more than 1e5 leaves)");
}

nlohmann::ordered_json to_json(const SynthSpec& spec) {
  nlohmann::ordered_json j;
  j["branching"] = spec.branching;
  j["depth"] = spec.depth;
  j["signature_tokens"] = spec.signature_tokens;
  j["doc_tokens"] = spec.doc_tokens;
  j["noise"] = spec.noise;
  j["docs_per_path"] = spec.docs_per_path;
  j["seed"] = spec.seed;
  return j;
}

SynthData generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  // Level by level, children in parent order.
  std::vector<LabelNode> nodes;
  std::vector<LabelId> frontier;
  for (int level = 1; level <= spec.depth; ++level) {
    std::vector<LabelId> next;
    const std::size_t parents = level == 1 ? 1 : frontier.size();
    for (std::size_t p = 0; p < parents; ++p) {
      for (int c = 0; c < spec.branching; ++c) {
        LabelNode n;
        n.id = static_cast<LabelId>(nodes.size());
        n.level = level;
        if (level > 1) n.parent = frontier[p];
        next.push_back(n.id);
        nodes.push_back(std::move(n));
      }
    }
    frontier = std::move(next);
  }

  // Unique signature words drawn from a seeded permutation of word indices.
  const std::size_t m = nodes.size();
  const std::size_t needed = m * static_cast<std::size_t>(spec.signature_tokens);
  const std::size_t space = kSyllables * kSyllables * kSyllables;
  if (needed > space) throw InvalidSpec("not enough distinct signature words");
  std::vector<std::size_t> word_ids(space);
  std::iota(word_ids.begin(), word_ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < needed; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(space - i));
    std::swap(word_ids[i], word_ids[j]);
  }

  SynthData data;
  data.signatures.resize(m);
  std::vector<std::string> vocab;
  for (std::size_t id = 0; id < m; ++id) {
    for (int s = 0; s < spec.signature_tokens; ++s) {
      std::string w = pseudo_word(word_ids[id * spec.signature_tokens + s]);
      data.signatures[id].push_back(w);
      vocab.push_back(std::move(w));
    }
    nodes[id].name = data.signatures[id].front();
  }
  data.taxonomy = Taxonomy::from_nodes(
      "synth-b" + std::to_string(spec.branching) + "-d" + std::to_string(spec.depth),
      std::move(nodes));

  auto make_split = [&](const std::string& prefix) {
    std::vector<Example> docs;
    std::size_t counter = 0;
    for (const LabelPath& path : data.taxonomy.leaf_paths()) {
      std::vector<const std::string*> pool;
      for (const LabelId v : path) {
        for (const auto& w : data.signatures[v]) pool.push_back(&w);
      }
      for (int d = 0; d < spec.docs_per_path; ++d) {
        Example ex;
        char id[32];
        std::snprintf(id, sizeof(id), "%s-%05zu", prefix.c_str(), counter++);
        ex.id = id;
        ex.path = path;
        for (int t = 0; t < spec.doc_tokens; ++t) {
          const std::string* tok = pool[rng.below(pool.size())];
          if (rng.unit() < spec.noise) tok = &vocab[rng.below(vocab.size())];
          if (t) ex.text += ' ';
          ex.text += *tok;
        }
        docs.push_back(std::move(ex));
      }
    }
    return docs;
  };
  data.train = make_split("train");
  data.dev = make_split("dev");
  data.test = make_split("test");
  return data;
}

void write_synth(const std::string& dir, const SynthSpec& spec, const SynthData& data) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_text_file((base / "taxonomy.json").string(), serialize_taxonomy(data.taxonomy));
  write_corpus((base / "train.jsonl").string(), data.train, data.taxonomy);
  write_corpus((base / "dev.jsonl").string(), data.dev, data.taxonomy);
  write_corpus((base / "test.jsonl").string(), data.test, data.taxonomy);
  write_text_file((base / "spec.json").string(), to_json(spec).dump(2) + "\n");
}

}  // namespace hiericrf
