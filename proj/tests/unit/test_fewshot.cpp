#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "../support/fixtures.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/fewshot.hpp"
#include "hiericrf/rng.hpp"

using namespace hiericrf;

namespace {

std::vector<Example> corpus_per_path(const Taxonomy& tax, int per_path) {
  std::vector<Example> out;
  for (const auto& path : tax.leaf_paths()) {
    for (int i = 0; i < per_path; ++i) {
      out.push_back({"ex" + std::to_string(out.size()), "text " + std::to_string(out.size()), path});
    }
  }
  return out;
}

std::map<LabelPath, int> path_counts(const SupportSet& s) {
  std::map<LabelPath, int> counts;
  for (const auto& ex : s.examples) ++counts[ex.path];
  return counts;
}

}  // namespace

TEST_CASE("exactly k examples per path returns the whole corpus") {
  const Taxonomy tax = fixtures::mini_dbpedia();
  const auto corpus = corpus_per_path(tax, 3);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const SupportSet s = greedy_sample(corpus, tax, 3, seed);
    CHECK(s.complete());
    CHECK(s.examples.size() == corpus.size());
    std::set<std::string> ids;
    for (const auto& ex : s.examples) ids.insert(ex.id);
    CHECK(ids.size() == corpus.size());
  }
}

TEST_CASE("k=1 over two paths meets the quota under every ordering") {
  const Taxonomy tax = fixtures::small_two_level();
  // Leaf paths A/B, A/C, X/Y; keep A/B and X/Y populated with two each.
  const LabelPath ab = tax.leaf_paths()[0];
  const LabelPath xy = tax.leaf_paths()[2];
  const std::vector<Example> corpus{{"a", "", ab}, {"b", "", ab}, {"c", "", xy}, {"d", "", xy}};
  std::vector<std::size_t> order{0, 1, 2, 3};
  int permutations = 0;
  do {
    const SupportSet s = fill_quotas(corpus, order, tax, 1);
    CHECK(s.examples.size() == 2);
    const auto counts = path_counts(s);
    CHECK(counts.at(ab) == 1);
    CHECK(counts.at(xy) == 1);
    // Only the empty A/C path is short.
    CHECK(s.short_paths == std::vector<std::size_t>{1});
    ++permutations;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(permutations == 24);
}

TEST_CASE("empty path is reported by name") {
  const Taxonomy tax = fixtures::small_two_level();
  auto corpus = corpus_per_path(tax, 2);
  corpus.erase(std::remove_if(corpus.begin(), corpus.end(),
                              [&](const Example& e) { return e.path == tax.leaf_paths()[1]; }),
               corpus.end());
  const SupportSet s = greedy_sample(corpus, tax, 2, 5);
  CHECK_FALSE(s.complete());
  CHECK(s.examples.size() == 4);
  try {
    require_complete(s, tax);
    FAIL("expected InsufficientData");
  } catch (const InsufficientData& e) {
    CHECK(std::string(e.what()).find("A/C") != std::string::npos);
    CHECK(e.category() == ErrorCategory::kData);
  }
}

TEST_CASE("sampling is bounded and reproducible") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Taxonomy tax = fixtures::random_taxonomy(rng, 1 + static_cast<int>(rng.below(3)), 2, 3);
    std::vector<Example> corpus;
    const auto& paths = tax.leaf_paths();
    for (int i = 0; i < 60; ++i) corpus.push_back({"e" + std::to_string(i), "", paths[rng.below(paths.size())]});
    const int k = 1 + static_cast<int>(rng.below(4));
    const std::uint64_t seed = rng.next();
    const SupportSet a = greedy_sample(corpus, tax, k, seed);
    const SupportSet b = greedy_sample(corpus, tax, k, seed);
    CHECK(a.examples == b.examples);
    for (const auto& [path, n] : path_counts(a)) CHECK(n <= k);
    if (a.complete()) CHECK(a.examples.size() == static_cast<std::size_t>(k) * paths.size());
  }
}

TEST_CASE("different seeds pick different subsets") {
  const Taxonomy tax = fixtures::mini_dbpedia();
  const auto corpus = corpus_per_path(tax, 10);
  CHECK(greedy_sample(corpus, tax, 2, 1).examples != greedy_sample(corpus, tax, 2, 2).examples);
}

TEST_CASE("invalid k and non-leaf paths") {
  const Taxonomy tax = fixtures::small_two_level();
  CHECK_THROWS_AS(greedy_sample({}, tax, 0, 1), InvalidArgument);
  const std::vector<Example> bad{{"z", "", {tax.id_of("A")}}};
  CHECK_THROWS_AS(greedy_sample(bad, tax, 1, 1), ValidationError);
}
