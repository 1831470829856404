#include <doctest.h>

#include "hiericrf/chain.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/rng.hpp"

using namespace hiericrf;

namespace {

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("schedule examples") {
  CHECK(build_schedule(2, 2).levels() == std::vector<int>{1, 2, 1, 2, 1});
  CHECK(build_schedule(1, 1).levels() == std::vector<int>{1});
  CHECK(build_schedule(3, 2).levels() == std::vector<int>{1, 2, 3, 2, 1, 3, 2, 1});
  CHECK(build_schedule(3, 1).levels() == std::vector<int>{1, 2, 3, 2, 1});
  CHECK(build_schedule(1, 3).levels() == std::vector<int>{1, 1, 1});
}

TEST_CASE("zero iterations is the ascending-only schedule") {
  CHECK(build_schedule(3, 0).levels() == std::vector<int>{1, 2, 3});
  CHECK(build_schedule(1, 0).levels() == std::vector<int>{1});
}

TEST_CASE("invalid schedule arguments") {
  CHECK_THROWS_AS(build_schedule(0, 2), InvalidArgument);
  CHECK_THROWS_AS(build_schedule(2, -1), InvalidArgument);
}

TEST_CASE("schedule invariants over a grid") {
  for (int d = 1; d <= 6; ++d) {
    for (int it = 1; it <= 7; ++it) {
      const ChainSchedule s = build_schedule(d, it);
      CHECK(s.length() == d + (d - 1) + (it - 1) * d);
      CHECK(s.length() == chain_length(d, it));
      for (int v = 1; v <= d; ++v) {
        CHECK(std::find(s.levels().begin(), s.levels().end(), v) != s.levels().end());
      }
      if (d >= 2) {
        for (int i = 0; i + 1 < s.length(); ++i) {
          const int a = s[i];
          const int b = s[i + 1];
          const bool boundary = a == 1 && b == d;
          CHECK((std::abs(a - b) == 1 || boundary));
        }
        // Final d slots read D, D-1, ..., 1.
        for (int k = 0; k < d; ++k) CHECK(s[s.length() - d + k] == d - k);
      }
    }
  }
}

TEST_CASE("readout positions are the last occurrence of each level") {
  const ChainSchedule s = build_schedule(3, 2);
  CHECK(s.readout_positions() == std::vector<int>{7, 6, 5});
  CHECK(build_schedule(3, 0).readout_positions() == std::vector<int>{0, 1, 2});
  CHECK(read_out({10, 11, 12, 11, 10, 13, 14, 15}, s) == LabelPath{15, 14, 13});
}

TEST_CASE("template rendering") {
  CHECK(render_template("x", build_schedule(2, 2), "[MASK]") ==
        "x. It was 1 level: [MASK] 2 level: [MASK] 1 level: [MASK] 2 level: [MASK] 1 level: [MASK].");
  CHECK(render_template("x", build_schedule(1, 1), "[MASK]") == "x. It was 1 level: [MASK].");
  CHECK(render_template("doc", build_schedule(2, 0), "<mask>") ==
        "doc. It was 1 level: <mask> 2 level: <mask>.");
  CHECK_THROWS_AS(render_template("x", build_schedule(1, 1), ""), InvalidArgument);
}

TEST_CASE("property: one mask per slot across random schedules") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(6));
    const int it = static_cast<int>(rng.below(7));
    const ChainSchedule s = build_schedule(d, it);
    CHECK(count_occurrences(render_template("some text", s, "[MASK]"), "[MASK]") == s.length());
  }
}

TEST_CASE("golden sequence repeats the gold path by level") {
  CHECK(golden_sequence({7, 9}, build_schedule(2, 2)) == std::vector<LabelId>{7, 9, 7, 9, 7});
  CHECK(golden_sequence({4}, build_schedule(1, 1)) == std::vector<LabelId>{4});
  CHECK(golden_sequence({1, 2, 3}, build_schedule(3, 2)) ==
        std::vector<LabelId>{1, 2, 3, 2, 1, 3, 2, 1});
  CHECK_THROWS_AS(golden_sequence({1, 2}, build_schedule(3, 2)), LengthMismatch);
}
