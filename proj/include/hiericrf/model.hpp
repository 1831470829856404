#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hiericrf/chain.hpp"
#include "hiericrf/corpus.hpp"
#include "hiericrf/crf.hpp"
#include "hiericrf/emission.hpp"
#include "hiericrf/metrics.hpp"
#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

enum class EmitterKind { kSurrogate, kExternal };

// Emissions supplied from an emissions file, keyed by example id.
struct ExternalEmissions {
  std::uint32_t labels = 0;
  std::uint32_t slots = 0;
  std::unordered_map<std::string, EmissionMatrix> by_id;

  static ExternalEmissions load(const std::string& path);
  const EmissionMatrix& at(const std::string& id) const;
};

struct ModelOptions {
  int iterations = kDefaultChainIterations;
  CrfMode mode = CrfMode::kFaithful;
  bool no_icrf = false;
  bool no_chain = false;
  EmitterKind emitter = EmitterKind::kSurrogate;
  std::size_t feature_dim = kDefaultFeatureDim;
  double verbalizer_gain = 1.0;
  double soft_penalty = kSoftPenalty;
  double hard_penalty = kHardPenalty;

  int effective_iterations() const { return no_chain ? 0 : iterations; }
};

// Everything needed to score an example: schedule, CRF and, for the
// surrogate emitter, verbalizer plus feature map.
struct Model {
  ModelOptions options;
  std::uint64_t taxonomy_fingerprint = 0;
  std::string taxonomy_name;
  ChainSchedule schedule;
  CrfParams crf;
  VerbalizerParams verbalizer;
  FeatureMap feature_map;
  // Free-form provenance written into the model header (seed, config, log).
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  static Model initialize(const Taxonomy& tax, const ModelOptions& options);

  int labels() const { return crf.labels(); }
  bool uses_crf() const { return !options.no_icrf; }

  EmissionMatrix emissions(const Example& ex, const ExternalEmissions* external) const;
  EmissionMatrix emissions(const FeatureVector& features) const;
  DecodeResult predict(const EmissionMatrix& z) const;
  void check_taxonomy(const Taxonomy& tax) const;
  // Header shape of an external emissions file against the schedule.
  void check_emissions(const ExternalEmissions* external) const;
};

struct Prediction {
  std::string id;
  DecodeResult result;
};

struct EvalOutcome {
  MetricsReport metrics;
  std::vector<Prediction> predictions;
};

// Decodes every example (in parallel up to `threads`, results kept in input
// order) and scores the per-level readouts against the gold paths.
EvalOutcome evaluate_model(const Model& model, const std::vector<Example>& examples,
                           const Taxonomy& tax, const ExternalEmissions* external,
                           int threads = 1);

// Binary model file: "ICRFMODL", u32 version, u64 header length, JSON header,
// then little-endian f64 arrays U, adapter, slot bias, T, start and u8 frozen
// masks for T and start.
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// HIERICRF_THREADS if set and positive, else 1.
int thread_cap_from_env();

}  // namespace hiericrf
