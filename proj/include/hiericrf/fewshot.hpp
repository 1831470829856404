#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hiericrf/corpus.hpp"
#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

struct SupportSet {
  std::vector<Example> examples;
  int k = 0;
  std::uint64_t seed = 0;
  // Indices into Taxonomy::leaf_paths() that got fewer than k examples.
  std::vector<std::size_t> short_paths;

  bool complete() const noexcept { return short_paths.empty(); }
};

// Scans corpus in the given index order, accepting an example while its leaf
// path has fewer than k picks.
SupportSet fill_quotas(const std::vector<Example>& corpus, std::span<const std::size_t> order,
                       const Taxonomy& tax, int k);

// Seeded shuffle, then a single scan that accepts an example while its leaf
// path still has quota left.
SupportSet greedy_sample(const std::vector<Example>& corpus, const Taxonomy& tax,
                         int k, std::uint64_t seed);

// Throws InsufficientData naming every short path.
void require_complete(const SupportSet& set, const Taxonomy& tax);

}  // namespace hiericrf
