#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "hiericrf/error.hpp"

namespace {

int exit_code(hiericrf::ErrorCategory c) {
  switch (c) {
    case hiericrf::ErrorCategory::kUsage:
      return 1;
    case hiericrf::ErrorCategory::kData:
      return 2;
    case hiericrf::ErrorCategory::kNumerical:
      return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hiericrf::cli;

  CLI::App app{"Hierarchy-aware chain CRF for few-shot hierarchical text classification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--taxonomy", g.taxonomy, "Taxonomy JSON file");
  app.add_option("--seed", g.seed, "Random seed (required by sample, train, synth)");
  auto* mode = app.add_option("--mode", g.mode, "CRF mode")->check(CLI::IsMember({"faithful", "strict"}));
  auto* iters = app.add_option("--iters", g.iterations, "Chain iterations")->check(CLI::NonNegativeNumber);
  app.add_flag("--no-icrf", g.no_icrf, "Replace CRF decoding with independent per-slot argmax");
  app.add_flag("--no-chain", g.no_chain, "Use the single ascending pass instead of the chain");
  app.add_option("--emissions", g.emissions, "Emissions file supplying per-slot logits");

  TemplateArgs ta;
  auto* tpl = app.add_subcommand("template", "Print the chain template and schedule");
  tpl->add_option("--depth", ta.depth, "Taxonomy depth (default: from --taxonomy)");
  tpl->add_option("--text", ta.text, "Input text");
  tpl->add_option("--mask", ta.mask, "Mask token");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw a K-shot support set");
  sample->add_option("--corpus", sa.corpus, "Labeled corpus JSONL")->required();
  sample->add_option("--k", sa.k, "Examples per leaf path")->required();
  sample->add_option("--out", sa.out, "Output JSONL")->required();
  sample->add_flag("--allow-partial", sa.allow_partial, "Keep a set with short paths instead of failing");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--train", tr.train, "Training JSONL")->required();
  train->add_option("--dev", tr.dev, "Dev JSONL")->required();
  train->add_option("--model", tr.model, "Output model file")->required();
  train->add_option("--log", tr.log, "Write the training log as JSON");
  train->add_option("--epochs", tr.config.epochs, "Maximum epochs")->capture_default_str();
  train->add_option("--batch-size", tr.config.batch_size, "Mini-batch size")->capture_default_str();
  train->add_option("--patience", tr.config.patience, "Early-stopping patience")->capture_default_str();
  train->add_option("--lr", tr.config.crf_lr, "Verbalizer/CRF learning rate")->capture_default_str();
  train->add_option("--feature-lr", tr.config.feature_lr, "Feature-map learning rate")->capture_default_str();
  train->add_option("--feature-dim", tr.feature_dim, "Hashed feature dimension")->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a model or a predictions file");
  eval->add_option("--model", ea.model, "Model file");
  eval->add_option("--corpus", ea.corpus, "Labeled corpus JSONL");
  eval->add_option("--predictions", ea.predictions, "Predictions JSONL {id, pred, gold}");
  eval->add_option("--out", ea.out, "Metrics JSON output")->capture_default_str();
  eval->add_option("--predictions-out", ea.predictions_out, "Write per-example predictions JSONL");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Decode label paths");
  predict->add_option("--model", pa.model, "Model file")->required();
  predict->add_option("--text", pa.text, "A single input text");
  predict->add_option("--corpus", pa.corpus, "JSONL with id and text");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic hierarchical corpus");
  synth->add_option("--out", ya.out, "Output directory")->required();
  synth->add_option("--branching", ya.branching, "Children per node")->capture_default_str();
  synth->add_option("--depth", ya.depth, "Taxonomy depth")->capture_default_str();
  synth->add_option("--signature-tokens", ya.signature_tokens, "Signature tokens per node")->capture_default_str();
  synth->add_option("--doc-tokens", ya.doc_tokens, "Tokens per document")->capture_default_str();
  synth->add_option("--noise", ya.noise, "Token replacement probability")->capture_default_str();
  synth->add_option("--docs-per-path", ya.docs_per_path, "Documents per leaf path per split")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  g.mode_set = mode->count() > 0;
  g.iterations_set = iters->count() > 0;

  try {
    if (*tpl) cmd_template(g, ta);
    if (*sample) cmd_sample(g, sa);
    if (*train) cmd_train(g, tr);
    if (*eval) cmd_eval(g, ea);
    if (*predict) cmd_predict(g, pa);
    if (*synth) cmd_synth(g, ya);
  } catch (const hiericrf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
