#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

struct LabelCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

// One prediction/gold pair. Gold must be a full root-to-leaf path; the
// prediction may be any label subset.
struct EvalSample {
  std::vector<LabelId> pred;
  std::vector<LabelId> gold;
};

struct MetricsReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double c_micro_f1 = 0.0;
  double c_macro_f1 = 0.0;
  double p_micro_f1 = 0.0;
  double p_macro_f1 = 0.0;
  std::size_t samples = 0;
  // Indexed by label id.
  std::vector<LabelCounts> standard;
  std::vector<LabelCounts> constrained;
  std::vector<LabelCounts> path;
};

// Standard counts plus two filtered variants. The filters only ever turn a
// true positive into a false negative:
//  - C: a correctly predicted label stays a TP only if all its ancestors are
//    predicted too.
//  - P: a correctly predicted label stays a TP only if its whole gold path
//    is predicted.
// Macro F1 averages over all taxonomy labels, with 0/0 taken as 0.
MetricsReport evaluate(const std::vector<EvalSample>& samples, const Taxonomy& tax);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report, const Taxonomy& tax);

// Reads {"id": str, "pred": [names], "gold": [names]} lines.
std::vector<EvalSample> load_prediction_samples(const std::string& path,
                                                const Taxonomy& tax);

}  // namespace hiericrf
