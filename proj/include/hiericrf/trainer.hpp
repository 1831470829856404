#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "hiericrf/model.hpp"

namespace hiericrf {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 8;
  int patience = 5;
  // Verbalizer, transitions and start scores.
  double crf_lr = 1e-4;
  // Surrogate feature map (adapter and slot bias).
  double feature_lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json to_json(const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  double train_nll = 0.0;
  double dev_micro_f1 = 0.0;
  bool improved = false;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;  // 0: initial parameters kept
  double best_dev_micro_f1 = 0.0;

  nlohmann::ordered_json to_json() const;
};

// Minimizes mean NLL over mini-batches with Adam. After every epoch the dev
// set is decoded; the best dev Micro-F1 parameters are kept and training
// stops after `patience` epochs without improvement.
TrainingLog fit(Model& model, const std::vector<Example>& train,
                const std::vector<Example>& dev, const Taxonomy& tax,
                const TrainConfig& config, const ExternalEmissions* external = nullptr);

}  // namespace hiericrf
