#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

inline constexpr int kDefaultChainIterations = 5;
inline constexpr std::string_view kDefaultMaskToken = "[MASK]";

// Sequence of taxonomy levels visited by the reasoning chain, one mask slot
// per entry. With iterations >= 1 the chain ascends 1..D, descends D-1..1,
// then repeats D..1 once per extra iteration. Zero iterations is the plain
// ascending template 1..D.
class ChainSchedule {
 public:
  static ChainSchedule build(int depth, int iterations);

  const std::vector<int>& levels() const noexcept { return levels_; }
  int length() const noexcept { return static_cast<int>(levels_.size()); }
  int depth() const noexcept { return depth_; }
  int iterations() const noexcept { return iterations_; }
  int operator[](std::size_t i) const { return levels_[i]; }

  // Position of the last slot carrying each level, indexed by level - 1.
  std::vector<int> readout_positions() const;

  friend bool operator==(const ChainSchedule&, const ChainSchedule&) = default;

 private:
  std::vector<int> levels_;
  int depth_ = 0;
  int iterations_ = 0;
};

inline ChainSchedule build_schedule(int depth, int iterations) {
  return ChainSchedule::build(depth, iterations);
}

// Expected length for iterations >= 1: D + (D - 1) + (I - 1) * D.
constexpr int chain_length(int depth, int iterations) {
  return iterations == 0 ? depth
                         : depth + (depth - 1) + (iterations - 1) * depth;
}

// "{text}. It was 1 level: [MASK] 2 level: [MASK]."
std::string render_template(std::string_view text, const ChainSchedule& schedule,
                            std::string_view mask_token = kDefaultMaskToken);

// Gold label at every slot: the path entry for that slot's level.
std::vector<LabelId> golden_sequence(const LabelPath& path,
                                     const ChainSchedule& schedule);

// Per-level labels read from the last slot of each level.
LabelPath read_out(const std::vector<LabelId>& sequence,
                   const ChainSchedule& schedule);

}  // namespace hiericrf
