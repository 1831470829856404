#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiericrf/corpus.hpp"
#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

struct SynthSpec {
  int branching = 3;
  int depth = 3;
  int signature_tokens = 3;   // per node
  int doc_tokens = 30;
  double noise = 0.3;         // per-token replacement probability
  int docs_per_path = 8;      // per split
  std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);
nlohmann::ordered_json to_json(const SynthSpec& spec);

struct SynthData {
  Taxonomy taxonomy;
  // Signature tokens per label id. A node's name is its first signature.
  std::vector<std::vector<std::string>> signatures;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

// Complete b-ary taxonomy of the given depth. Each document draws its tokens
// uniformly from the signatures along its leaf path, then swaps each token
// for a uniformly random vocabulary token with probability `noise`. The
// vocabulary is the union of all signatures.
SynthData generate(const SynthSpec& spec);

// Writes taxonomy.json, train/dev/test.jsonl and spec.json into dir.
void write_synth(const std::string& dir, const SynthSpec& spec, const SynthData& data);

}  // namespace hiericrf
