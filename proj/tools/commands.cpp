#include "commands.hpp"

#include <fstream>
#include <iostream>

#include "hiericrf/chain.hpp"
#include "hiericrf/corpus.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/fewshot.hpp"
#include "hiericrf/metrics.hpp"
#include "hiericrf/model.hpp"
#include "hiericrf/synthgen.hpp"

namespace hiericrf::cli {

namespace {

using nlohmann::ordered_json;

Taxonomy require_taxonomy(const GlobalOptions& g) {
  if (g.taxonomy.empty()) throw InvalidArgument("--taxonomy is required");
  return load_taxonomy_file(g.taxonomy);
}

std::uint64_t require_seed(const GlobalOptions& g) {
  if (!g.seed) throw InvalidArgument("--seed is required");
  return *g.seed;
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidArgument(std::string(flag) + " is required");
  return value;
}

ordered_json names(const Taxonomy& tax, const std::vector<LabelId>& ids) {
  ordered_json out = ordered_json::array();
  for (const LabelId v : ids) out.push_back(tax.node(v).name);
  return out;
}

// Model-shaping flags on eval/predict must agree with the loaded model.
void check_flags_match(const GlobalOptions& g, const Model& model) {
  const ModelOptions& o = model.options;
  if (g.mode_set && parse_crf_mode(g.mode) != o.mode) {
    throw InvalidArgument("--mode " + g.mode + " differs from the model's mode");
  }
  if (g.iterations_set && g.iterations != o.iterations) {
    throw InvalidArgument("--iters differs from the model's iteration count");
  }
  if (g.no_icrf && !o.no_icrf) throw InvalidArgument("--no-icrf given but the model uses the CRF");
  if (g.no_chain && !o.no_chain) throw InvalidArgument("--no-chain given but the model uses the chain");
}

std::optional<ExternalEmissions> external_for(const GlobalOptions& g, const Model& model) {
  if (model.options.emitter == EmitterKind::kSurrogate) {
    if (!g.emissions.empty()) {
      throw InvalidArgument("model uses the built-in emitter; --emissions does not apply");
    }
    return std::nullopt;
  }
  if (g.emissions.empty()) throw InvalidArgument("model was trained on external emissions; pass --emissions");
  return ExternalEmissions::load(g.emissions);
}

void write_json(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// Lines {"id", "text"}; any "path" field is ignored.
std::vector<Example> load_unlabeled(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus '" + path + "'");
  std::vector<Example> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(n) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("text") ||
        !j["text"].is_string()) {
      throw ParseError(path + ":" + std::to_string(n) + ": needs string 'id' and 'text'");
    }
    out.push_back({j["id"].get<std::string>(), j["text"].get<std::string>(), {}});
  }
  return out;
}

}  // namespace

void cmd_template(const GlobalOptions& g, const TemplateArgs& a) {
  int depth = 0;
  if (a.depth) {
    depth = *a.depth;
  } else if (!g.taxonomy.empty()) {
    depth = load_taxonomy_file(g.taxonomy).depth();
  } else {
    throw InvalidArgument("template needs --depth or --taxonomy");
  }
  const ChainSchedule s = ChainSchedule::build(depth, g.no_chain ? 0 : g.iterations);
  std::cout << render_template(a.text, s, a.mask) << "\n";
  std::cout << ordered_json{{"levels", s.levels()}, {"l", s.length()}}.dump() << "\n";
}

void cmd_sample(const GlobalOptions& g, const SampleArgs& a) {
  const Taxonomy tax = require_taxonomy(g);
  const std::uint64_t seed = require_seed(g);
  const auto corpus = load_corpus(require(a.corpus, "--corpus"), tax);
  const SupportSet set = greedy_sample(corpus, tax, a.k, seed);
  write_corpus(require(a.out, "--out"), set.examples, tax);
  std::cerr << "sampled " << set.examples.size() << " examples over " << tax.leaf_paths().size()
            << " paths\n";
  if (!set.complete()) {
    if (!a.allow_partial) require_complete(set, tax);
    std::cerr << "warning: " << set.short_paths.size() << " path(s) short of k=" << a.k << "\n";
  }
}

void cmd_train(const GlobalOptions& g, TrainArgs a) {
  const Taxonomy tax = require_taxonomy(g);
  a.config.seed = require_seed(g);
  const auto train = load_corpus(require(a.train, "--train"), tax);
  const auto dev = load_corpus(require(a.dev, "--dev"), tax);
  require(a.model, "--model");

  ModelOptions o;
  o.iterations = g.iterations;
  o.mode = parse_crf_mode(g.mode);
  o.no_icrf = g.no_icrf;
  o.no_chain = g.no_chain;
  o.feature_dim = a.feature_dim;
  std::optional<ExternalEmissions> external;
  if (!g.emissions.empty()) {
    o.emitter = EmitterKind::kExternal;
    external = ExternalEmissions::load(g.emissions);
  }
  Model model = Model::initialize(tax, o);
  const TrainingLog log = fit(model, train, dev, tax, a.config, external ? &*external : nullptr);
  model.provenance["train"] = to_json(a.config);
  model.provenance["log"] = log.to_json();
  save_model(a.model, model);
  if (!a.log.empty()) write_json(a.log, log.to_json());
  std::cerr << "trained " << log.epochs.size() << " epoch(s); best dev micro-F1 "
            << log.best_dev_micro_f1 << " at epoch " << log.best_epoch << "\n";
}

void cmd_eval(const GlobalOptions& g, const EvalArgs& a) {
  const Taxonomy tax = require_taxonomy(g);
  std::vector<EvalSample> samples;
  std::vector<std::string> ids;
  if (!a.predictions.empty()) {
    if (!a.model.empty()) throw InvalidArgument("give either --model or --predictions, not both");
    samples = load_prediction_samples(a.predictions, tax);
  } else {
    const Model model = load_model(require(a.model, "--model or --predictions"));
    model.check_taxonomy(tax);
    check_flags_match(g, model);
    const auto external = external_for(g, model);
    const auto corpus = load_corpus(require(a.corpus, "--corpus"), tax);
    const EvalOutcome out =
        evaluate_model(model, corpus, tax, external ? &*external : nullptr, thread_cap_from_env());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      samples.push_back({out.predictions[i].result.per_level, corpus[i].path});
      ids.push_back(corpus[i].id);
    }
  }
  const MetricsReport report = evaluate(samples, tax);
  write_json(a.out, metrics_to_json(report, tax));
  if (!a.predictions_out.empty()) {
    if (ids.empty() && !samples.empty()) {
      throw InvalidArgument("--predictions-out needs --model");
    }
    std::string text;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      text += ordered_json{{"id", ids[i]}, {"pred", names(tax, samples[i].pred)}, {"gold", names(tax, samples[i].gold)}}
                  .dump() +
              "\n";
    }
    write_text_file(a.predictions_out, text);
  }
  ordered_json summary;
  for (const char* key : {"micro_f1", "macro_f1", "c_micro_f1", "c_macro_f1", "p_micro_f1", "p_macro_f1"}) {
    summary[key] = metrics_to_json(report, tax)[key];
  }
  std::cout << summary.dump() << "\n";
}

void cmd_predict(const GlobalOptions& g, const PredictArgs& a) {
  const Taxonomy tax = require_taxonomy(g);
  const Model model = load_model(require(a.model, "--model"));
  model.check_taxonomy(tax);
  check_flags_match(g, model);
  const auto external = external_for(g, model);

  std::vector<Example> examples;
  if (!a.text.empty() && !a.corpus.empty()) throw InvalidArgument("give either --text or --corpus");
  if (!a.text.empty()) {
    if (external) throw InvalidArgument("--text needs the built-in emitter; use --corpus with ids");
    examples.push_back({"text", a.text, {}});
  } else {
    examples = load_unlabeled(require(a.corpus, "--text or --corpus"));
  }
  for (const Example& ex : examples) {
    const DecodeResult r = model.predict(model.emissions(ex, external ? &*external : nullptr));
    ordered_json j;
    j["id"] = ex.id;
    j["path"] = names(tax, r.per_level);
    j["sequence"] = names(tax, r.sequence);
    j["score"] = r.score;
    std::cout << j.dump() << "\n";
  }
}

void cmd_synth(const GlobalOptions& g, const SynthArgs& a) {
  SynthSpec spec;
  spec.branching = a.branching;
  spec.depth = a.depth;
  spec.signature_tokens = a.signature_tokens;
  spec.doc_tokens = a.doc_tokens;
  spec.noise = a.noise;
  spec.docs_per_path = a.docs_per_path;
  spec.seed = require_seed(g);
  const SynthData data = generate(spec);
  write_synth(require(a.out, "--out"), spec, data);
  std::cerr << "wrote " << data.taxonomy.label_count() << " labels, " << data.train.size() << "/"
            << data.dev.size() << "/" << data.test.size() << " train/dev/test documents to " << a.out
            << "\n";
}

}  // namespace hiericrf::cli
