#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hiericrf/trainer.hpp"

namespace hiericrf::cli {

// Flags accepted before or after any subcommand.
struct GlobalOptions {
  std::string taxonomy;
  std::optional<std::uint64_t> seed;
  std::string mode = "faithful";
  int iterations = 5;
  bool no_icrf = false;
  bool no_chain = false;
  std::string emissions;
  // Which model-shaping flags were given explicitly.
  bool mode_set = false;
  bool iterations_set = false;
};

struct TemplateArgs {
  std::optional<int> depth;
  std::string text = "x";
  std::string mask = "[MASK]";
};

struct SampleArgs {
  std::string corpus;
  int k = 0;
  std::string out;
  bool allow_partial = false;
};

struct TrainArgs {
  std::string train;
  std::string dev;
  std::string model;
  std::string log;
  std::size_t feature_dim = std::size_t{1} << 15;
  TrainConfig config;
};

struct EvalArgs {
  std::string model;
  std::string corpus;
  std::string predictions;
  std::string out = "metrics.json";
  std::string predictions_out;
};

struct PredictArgs {
  std::string model;
  std::string text;
  std::string corpus;
};

struct SynthArgs {
  std::string out;
  int branching = 3;
  int depth = 3;
  int signature_tokens = 3;
  int doc_tokens = 30;
  double noise = 0.3;
  int docs_per_path = 8;
};

void cmd_template(const GlobalOptions& g, const TemplateArgs& a);
void cmd_sample(const GlobalOptions& g, const SampleArgs& a);
void cmd_train(const GlobalOptions& g, TrainArgs a);
void cmd_eval(const GlobalOptions& g, const EvalArgs& a);
void cmd_predict(const GlobalOptions& g, const PredictArgs& a);
void cmd_synth(const GlobalOptions& g, const SynthArgs& a);

}  // namespace hiericrf::cli
