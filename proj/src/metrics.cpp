#include "hiericrf/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "hiericrf/error.hpp"

namespace hiericrf {

namespace {

double f1(long tp, long fp, long fn) {
  const long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

void summarize(const std::vector<LabelCounts>& counts, double& micro, double& macro) {
  LabelCounts total;
  double sum = 0.0;
  for (const LabelCounts& c : counts) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    sum += f1(c.tp, c.fp, c.fn);
  }
  micro = f1(total.tp, total.fp, total.fn);
  macro = counts.empty() ? 0.0 : sum / static_cast<double>(counts.size());
}

std::vector<LabelId> unique_sorted(std::vector<LabelId> ids, int m) {
  for (const LabelId v : ids) {
    if (v < 0 || v >= m) throw UnknownLabel("label id " + std::to_string(v) + " out of range");
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

MetricsReport evaluate(const std::vector<EvalSample>& samples, const Taxonomy& tax) {
  const int m = tax.label_count();
  MetricsReport r;
  r.samples = samples.size();
  r.standard.assign(m, {});
  r.constrained.assign(m, {});
  r.path.assign(m, {});

  std::vector<char> in_pred(m, 0);
  std::vector<char> in_gold(m, 0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto pred = unique_sorted(samples[s].pred, m);
    const auto gold = unique_sorted(samples[s].gold, m);

    // Gold must be exactly one root-to-leaf path.
    LabelPath gold_path(gold.begin(), gold.end());
    std::sort(gold_path.begin(), gold_path.end(),
              [&](LabelId a, LabelId b) { return tax.level(a) < tax.level(b); });
    if (!tax.path_index(gold_path)) {
      throw InvalidGold("sample #" + std::to_string(s) + " gold is not a root-to-leaf path");
    }

    for (const LabelId v : pred) in_pred[v] = 1;
    for (const LabelId v : gold) in_gold[v] = 1;
    const bool full_path = std::all_of(gold.begin(), gold.end(),
                                       [&](LabelId v) { return in_pred[v] != 0; });

    for (const LabelId v : pred) {
      if (!in_gold[v]) {
        ++r.standard[v].fp;
        ++r.constrained[v].fp;
        ++r.path[v].fp;
        continue;
      }
      ++r.standard[v].tp;
      const auto anc = ancestors(tax, v);
      const bool ancestors_ok =
          std::all_of(anc.begin(), anc.end(), [&](LabelId a) { return in_pred[a] != 0; });
      ++(ancestors_ok ? r.constrained[v].tp : r.constrained[v].fn);
      ++(full_path ? r.path[v].tp : r.path[v].fn);
    }
    for (const LabelId v : gold) {
      if (!in_pred[v]) {
        ++r.standard[v].fn;
        ++r.constrained[v].fn;
        ++r.path[v].fn;
      }
    }

    for (const LabelId v : pred) in_pred[v] = 0;
    for (const LabelId v : gold) in_gold[v] = 0;
  }

  summarize(r.standard, r.micro_f1, r.macro_f1);
  summarize(r.constrained, r.c_micro_f1, r.c_macro_f1);
  summarize(r.path, r.p_micro_f1, r.p_macro_f1);
  return r;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& report, const Taxonomy& tax) {
  using nlohmann::ordered_json;
  auto table = [&](const std::vector<LabelCounts>& counts) {
    ordered_json t = ordered_json::object();
    for (const LabelNode& n : tax.nodes()) {
      const LabelCounts& c = counts[n.id];
      t[n.name] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    }
    return t;
  };
  ordered_json j;
  j["samples"] = report.samples;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["c_micro_f1"] = report.c_micro_f1;
  j["c_macro_f1"] = report.c_macro_f1;
  j["p_micro_f1"] = report.p_micro_f1;
  j["p_macro_f1"] = report.p_macro_f1;
  j["counts"] = {{"standard", table(report.standard)},
                 {"c", table(report.constrained)},
                 {"p", table(report.path)}};
  return j;
}

std::vector<EvalSample> load_prediction_samples(const std::string& path,
                                                const Taxonomy& tax) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open predictions file '" + path + "'");
  std::vector<EvalSample> out;
  std::string line;
  std::size_t lineno = 0;
  auto names = [&](const nlohmann::json& arr) {
    if (!arr.is_array()) throw ParseError("line " + std::to_string(lineno) + ": expected a name list");
    std::vector<LabelId> ids;
    for (const auto& n : arr) {
      if (!n.is_string()) throw ParseError("line " + std::to_string(lineno) + ": label names must be strings");
      ids.push_back(tax.id_of(n.get<std::string>()));
    }
    return ids;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("pred") || !j.contains("gold")) {
      throw ParseError("line " + std::to_string(lineno) + ": needs 'pred' and 'gold'");
    }
    out.push_back({names(j["pred"]), names(j["gold"])});
  }
  return out;
}

}  // namespace hiericrf
