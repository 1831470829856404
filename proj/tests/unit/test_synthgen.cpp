#include <doctest.h>

#include <set>
#include <sstream>

#include "../support/temp_dir.hpp"
#include "hiericrf/corpus.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/synthgen.hpp"

using namespace hiericrf;

namespace {

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("complete ternary taxonomy sizes") {
  SynthSpec spec;
  spec.seed = 7;
  const SynthData d = generate(spec);
  CHECK(d.taxonomy.depth() == 3);
  CHECK(d.taxonomy.labels_at_level(1).size() == 3);
  CHECK(d.taxonomy.labels_at_level(2).size() == 9);
  CHECK(d.taxonomy.labels_at_level(3).size() == 27);
  CHECK(d.taxonomy.label_count() == 39);
  CHECK(d.taxonomy.leaf_paths().size() == 27);
  CHECK(d.train.size() == 27u * spec.docs_per_path);
  CHECK(d.dev.size() == d.train.size());
  CHECK(d.test.size() == d.train.size());
  CHECK(d.train.front().id == "train-00000");
  CHECK(d.test.back().id == "test-00215");

  std::set<std::string> names, sigs;
  for (const auto& n : d.taxonomy.nodes()) names.insert(n.name);
  for (const auto& s : d.signatures) sigs.insert(s.begin(), s.end());
  CHECK(names.size() == 39);
  CHECK(sigs.size() == 39u * 3u);
  for (const auto& ex : d.train) CHECK(words(ex.text).size() == 30);
}

TEST_CASE("single-branch spec has one path") {
  SynthSpec spec;
  spec.branching = 1;
  spec.depth = 2;
  spec.noise = 0.0;
  const SynthData d = generate(spec);
  CHECK(d.taxonomy.label_count() == 2);
  CHECK(d.taxonomy.leaf_paths().size() == 1);
}

TEST_CASE("noise-free documents only use their own path's signatures") {
  SynthSpec spec;
  spec.noise = 0.0;
  spec.seed = 3;
  const SynthData d = generate(spec);
  std::vector<std::set<std::string>> leaf_tokens(d.taxonomy.leaf_paths().size());
  for (const auto& ex : d.train) {
    std::set<std::string> pool;
    for (const LabelId v : ex.path) pool.insert(d.signatures[v].begin(), d.signatures[v].end());
    const auto& leaf_sig = d.signatures[ex.path.back()];
    for (const auto& w : words(ex.text)) {
      CHECK(pool.count(w) == 1);
      if (std::find(leaf_sig.begin(), leaf_sig.end(), w) != leaf_sig.end()) {
        leaf_tokens[*d.taxonomy.path_index(ex.path)].insert(w);
      }
    }
  }
  for (std::size_t a = 0; a < leaf_tokens.size(); ++a) {
    for (std::size_t b = a + 1; b < leaf_tokens.size(); ++b) {
      for (const auto& w : leaf_tokens[a]) CHECK(leaf_tokens[b].count(w) == 0);
    }
  }
}

TEST_CASE("signature frequency tracks the noise rate") {
  SynthSpec spec;
  spec.noise = 0.3;
  spec.seed = 11;
  spec.docs_per_path = 20;
  const SynthData d = generate(spec);
  double on_path = 0.0, total = 0.0;
  for (const auto& ex : d.train) {
    std::set<std::string> pool;
    for (const LabelId v : ex.path) pool.insert(d.signatures[v].begin(), d.signatures[v].end());
    for (const auto& w : words(ex.text)) {
      on_path += pool.count(w);
      total += 1.0;
    }
  }
  // Replacement tokens land back in the pool with probability 9/117.
  CHECK(on_path / total >= 0.7);
  CHECK(on_path / total == doctest::Approx(0.7 + 0.3 * 9.0 / 117.0).epsilon(0.02));
}

TEST_CASE("generation is deterministic in the seed") {
  SynthSpec spec;
  spec.seed = 5;
  const SynthData a = generate(spec);
  const SynthData b = generate(spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(serialize_taxonomy(a.taxonomy) == serialize_taxonomy(b.taxonomy));
  spec.seed = 6;
  CHECK(generate(spec).train != a.train);
}

TEST_CASE("invalid specs") {
  auto bad = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    return s;
  };
  CHECK_THROWS_AS(generate(bad([](SynthSpec& s) { s.branching = 0; })), InvalidSpec);
  CHECK_THROWS_AS(generate(bad([](SynthSpec& s) { s.depth = 0; })), InvalidSpec);
  CHECK_THROWS_AS(generate(bad([](SynthSpec& s) { s.signature_tokens = 0; })), InvalidSpec);
  CHECK_THROWS_AS(generate(bad([](SynthSpec& s) { s.noise = 1.5; })), InvalidSpec);
  CHECK_THROWS_AS(generate(bad([](SynthSpec& s) { s.noise = -0.1; })), InvalidSpec);
  CHECK(InvalidSpec("x").category() == ErrorCategory::kUsage);
}

TEST_CASE("written files reload") {
  fixtures::TempDir dir;
  SynthSpec spec;
  spec.branching = 2;
  spec.depth = 2;
  spec.seed = 9;
  const SynthData d = generate(spec);
  write_synth(dir.path().string(), spec, d);
  const Taxonomy tax = load_taxonomy_file(dir.file("taxonomy.json"));
  CHECK(tax.fingerprint() == d.taxonomy.fingerprint());
  CHECK(load_corpus(dir.file("train.jsonl"), tax) == d.train);
  CHECK(load_corpus(dir.file("test.jsonl"), tax) == d.test);
  const auto j = nlohmann::json::parse(read_text_file(dir.file("spec.json")));
  CHECK(j["seed"] == 9);
  CHECK(j["branching"] == 2);
}
