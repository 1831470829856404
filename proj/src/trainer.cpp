#include "hiericrf/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "hiericrf/error.hpp"
#include "hiericrf/rng.hpp"

namespace hiericrf {

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["patience"] = c.patience;
  j["crf_lr"] = c.crf_lr;
  j["feature_lr"] = c.feature_lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["seed"] = c.seed;
  return j;
}

nlohmann::ordered_json TrainingLog::to_json() const {
  nlohmann::ordered_json j;
  j["best_epoch"] = best_epoch;
  j["best_dev_micro_f1"] = best_dev_micro_f1;
  auto rows = nlohmann::ordered_json::array();
  for (const EpochLog& e : epochs) {
    nlohmann::ordered_json r;
    r["epoch"] = e.epoch;
    r["train_nll"] = e.train_nll;
    r["dev_micro_f1"] = e.dev_micro_f1;
    r["improved"] = e.improved;
    rows.push_back(std::move(r));
  }
  j["epochs"] = std::move(rows);
  return j;
}

namespace {

// First and second moments for one parameter block.
class AdamState {
 public:
  explicit AdamState(std::size_t n = 0) : m_(n, 0.0), v_(n, 0.0) {}

  void update(double& param, std::size_t k, double grad, double lr, double b1, double b2,
              double eps, double bc1, double bc2) {
    m_[k] = b1 * m_[k] + (1.0 - b1) * grad;
    v_[k] = b2 * v_[k] + (1.0 - b2) * grad * grad;
    param -= lr * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + eps);
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
};

struct Snapshot {
  VerbalizerParams verbalizer;
  FeatureMap feature_map;
  MatrixD transitions;
  std::vector<double> start;

  static Snapshot of(const Model& m) {
    return {m.verbalizer, m.feature_map, m.crf.transitions, m.crf.start};
  }
  void restore(Model& m) const {
    m.verbalizer = verbalizer;
    m.feature_map = feature_map;
    m.crf.transitions = transitions;
    m.crf.start = start;
  }
};

void check_config(const TrainConfig& c) {
  if (c.epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (c.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (c.patience < 1) throw InvalidArgument("patience must be >= 1");
  if (!(c.crf_lr > 0.0) || !(c.feature_lr > 0.0)) throw InvalidArgument("learning rates must be > 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw InvalidArgument("Adam betas must be in [0, 1)");
  }
}

}  // namespace

TrainingLog fit(Model& model, const std::vector<Example>& train,
                const std::vector<Example>& dev, const Taxonomy& tax,
                const TrainConfig& config, const ExternalEmissions* external) {
  check_config(config);
  if (train.empty()) throw EmptyDataset("training set is empty");
  model.check_taxonomy(tax);

  TrainingLog log;
  if (config.epochs == 0) return log;

  const bool surrogate = model.options.emitter == EmitterKind::kSurrogate;
  const bool use_crf = model.uses_crf();
  const std::size_t m = static_cast<std::size_t>(model.labels());
  const std::size_t r = surrogate ? model.options.feature_dim : 0;
  const std::size_t depth = static_cast<std::size_t>(model.schedule.depth());
  const std::size_t l = static_cast<std::size_t>(model.schedule.length());

  std::vector<FeatureVector> features;
  std::vector<std::vector<LabelId>> gold;
  for (const Example& ex : train) {
    if (surrogate) features.push_back(hash_features(ex.text, r));
    gold.push_back(golden_sequence(ex.path, model.schedule));
  }

  AdamState adam_embed(m * r);
  AdamState adam_adapter(m * r);
  AdamState adam_slot(surrogate ? m * depth : 0);
  AdamState adam_trans(m * m);
  AdamState adam_start(m);

  // Columns of the hashed space that ever received gradient. Elsewhere both
  // moments are zero, so skipping them matches a dense update exactly.
  std::vector<char> touched(r, 0);
  std::vector<std::uint32_t> touched_cols;

  MatrixD g_embed(m, r, 0.0);
  MatrixD g_slot(surrogate ? m : 0, surrogate ? depth : 0, 0.0);
  MatrixD g_trans(m, m, 0.0);
  std::vector<double> g_start(m, 0.0);
  std::vector<double> colsum(m, 0.0);
  std::vector<std::uint32_t> batch_cols;

  Rng rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Snapshot best = Snapshot::of(model);
  double best_dev = -std::numeric_limits<double>::infinity();
  int stale = 0;
  long step = 0;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double eps = config.adam_eps;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_nll = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - begin);
      batch_cols.clear();

      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t idx = order[b];
        const EmissionMatrix z =
            surrogate ? model.emissions(features[idx]) : model.emissions(train[idx], external);
        NllGradients g;
        try {
          g = use_crf ? nll_and_grads(z, gold[idx], model.crf)
                      : independent_nll_and_grads(z, gold[idx], model.crf);
        } catch (const NumericalError& e) {
          throw DivergenceError(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
        }
        if (!std::isfinite(g.nll)) {
          throw DivergenceError("epoch " + std::to_string(epoch) + ": non-finite loss on '" +
                                train[idx].id + "'");
        }
        epoch_nll += g.nll;

        if (use_crf) {
          for (std::size_t k = 0; k < g_trans.size(); ++k) {
            g_trans.data()[k] += inv * g.grad_transitions.data()[k];
          }
          for (std::size_t y = 0; y < m; ++y) g_start[y] += inv * g.grad_start[y];
        }
        if (surrogate) {
          std::fill(colsum.begin(), colsum.end(), 0.0);
          for (std::size_t i = 0; i < l; ++i) {
            const auto row = g.grad_z.row(i);
            const std::size_t lv = static_cast<std::size_t>(model.schedule[i]) - 1;
            for (std::size_t y = 0; y < m; ++y) {
              colsum[y] += row[y];
              g_slot(y, lv) += inv * row[y];
            }
          }
          for (const auto& [col, w] : features[idx].entries) {
            batch_cols.push_back(col);
            for (std::size_t y = 0; y < m; ++y) g_embed(y, col) += inv * colsum[y] * w;
          }
        }
      }

      ++step;
      const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));

      if (surrogate) {
        for (const std::uint32_t col : batch_cols) {
          if (!touched[col]) {
            touched[col] = 1;
            touched_cols.push_back(col);
          }
        }
        MatrixD& u = model.verbalizer.weights;
        MatrixD& f = model.feature_map.adapter;
        for (std::size_t y = 0; y < m; ++y) {
          for (const std::uint32_t col : touched_cols) {
            const std::size_t k = y * r + col;
            const double grad = g_embed.data()[k];
            adam_embed.update(u.data()[k], k, grad, config.crf_lr, b1, b2, eps, bc1, bc2);
            adam_adapter.update(f.data()[k], k, grad, config.feature_lr, b1, b2, eps, bc1, bc2);
          }
        }
        for (const std::uint32_t col : batch_cols) {
          for (std::size_t y = 0; y < m; ++y) g_embed(y, col) = 0.0;
        }
        MatrixD& slot = model.feature_map.slot_bias;
        for (std::size_t k = 0; k < slot.size(); ++k) {
          adam_slot.update(slot.data()[k], k, g_slot.data()[k], config.feature_lr, b1, b2, eps,
                           bc1, bc2);
        }
        g_slot.fill(0.0);
      }

      if (use_crf) {
        CrfParams& crf = model.crf;
        for (std::size_t k = 0; k < crf.transitions.size(); ++k) {
          if (crf.frozen.data()[k]) continue;
          adam_trans.update(crf.transitions.data()[k], k, g_trans.data()[k], config.crf_lr, b1,
                            b2, eps, bc1, bc2);
        }
        for (std::size_t y = 0; y < m; ++y) {
          if (crf.start_frozen[y]) continue;
          adam_start.update(crf.start[y], y, g_start[y], config.crf_lr, b1, b2, eps, bc1, bc2);
        }
        g_trans.fill(0.0);
        std::fill(g_start.begin(), g_start.end(), 0.0);
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_nll = epoch_nll / static_cast<double>(train.size());
    if (!dev.empty()) {
      entry.dev_micro_f1 = evaluate_model(model, dev, tax, external, 1).metrics.micro_f1;
      if (entry.dev_micro_f1 > best_dev) {
        best_dev = entry.dev_micro_f1;
        best = Snapshot::of(model);
        log.best_epoch = epoch;
        log.best_dev_micro_f1 = best_dev;
        entry.improved = true;
        stale = 0;
      } else {
        ++stale;
      }
    } else {
      log.best_epoch = epoch;
    }
    log.epochs.push_back(entry);
    if (!dev.empty() && stale >= config.patience) break;
  }

  if (!dev.empty()) best.restore(model);
  return log;
}

}  // namespace hiericrf
