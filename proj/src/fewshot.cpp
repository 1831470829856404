#include "hiericrf/fewshot.hpp"

#include <numeric>

#include "hiericrf/error.hpp"
#include "hiericrf/rng.hpp"

namespace hiericrf {

SupportSet fill_quotas(const std::vector<Example>& corpus, std::span<const std::size_t> order,
                       const Taxonomy& tax, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const std::size_t paths = tax.leaf_paths().size();
  SupportSet out;
  out.k = k;
  std::vector<int> quota(paths, 0);
  std::size_t filled = 0;
  for (const std::size_t idx : order) {
    if (filled == paths) break;
    const Example& ex = corpus.at(idx);
    const auto p = tax.path_index(ex.path);
    if (!p) throw ValidationError("example '" + ex.id + "' does not carry a root-to-leaf path");
    if (quota[*p] >= k) continue;
    out.examples.push_back(ex);
    if (++quota[*p] == k) ++filled;
  }
  for (std::size_t p = 0; p < paths; ++p) {
    if (quota[p] < k) out.short_paths.push_back(p);
  }
  return out;
}

SupportSet greedy_sample(const std::vector<Example>& corpus, const Taxonomy& tax, int k,
                         std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  SupportSet out = fill_quotas(corpus, order, tax, k);
  out.seed = seed;
  return out;
}

void require_complete(const SupportSet& set, const Taxonomy& tax) {
  if (set.complete()) return;
  std::string msg = std::to_string(set.short_paths.size()) + " path(s) have fewer than " +
                    std::to_string(set.k) + " examples:";
  for (const std::size_t p : set.short_paths) {
    msg += ' ';
    const LabelPath& path = tax.leaf_paths()[p];
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (j) msg += '/';
      msg += tax.node(path[j]).name;
    }
  }
  throw InsufficientData(msg);
}

}  // namespace hiericrf
