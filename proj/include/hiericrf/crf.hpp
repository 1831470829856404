#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hiericrf/chain.hpp"
#include "hiericrf/emission.hpp"
#include "hiericrf/matrix.hpp"
#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

enum class CrfMode { kFaithful, kStrict };

std::string_view to_string(CrfMode mode);
CrfMode parse_crf_mode(std::string_view text);

inline constexpr double kSoftPenalty = -10.0;
inline constexpr double kHardPenalty = -1e30;

// Linear-chain CRF parameters over the m taxonomy labels. Scores are in log
// space: score(y) = start[y_1] + sum_i z_i[y_i] + sum_{i>1} T[y_{i-1}, y_i].
struct CrfParams {
  MatrixD transitions;
  std::vector<double> start;
  CrfMode mode = CrfMode::kFaithful;
  // Entries excluded from gradient updates.
  Matrix<std::uint8_t> frozen;
  std::vector<std::uint8_t> start_frozen;
  // Strict mode restricts slot i to labels whose level equals slot_levels[i].
  std::vector<int> label_levels;
  std::vector<int> slot_levels;
  double soft_penalty = kSoftPenalty;
  double hard_penalty = kHardPenalty;

  int labels() const noexcept { return static_cast<int>(start.size()); }

  // Zero transitions and start scores, nothing frozen or masked.
  static CrfParams neutral(int labels);

  bool masks_states() const noexcept {
    return mode == CrfMode::kStrict && !slot_levels.empty();
  }
  bool state_allowed(int slot, LabelId y) const {
    return !masks_states() || label_levels[y] == slot_levels[slot];
  }
};

// Transition initialization from the hierarchy. Level pairs the schedule
// never visits consecutively start at the penalty; strict mode additionally
// hard-masks adjacent-level pairs that are not parent/child and boundary
// (1, D) pairs whose level-1 label is not the ancestor of the level-D label.
CrfParams init_transitions(const Taxonomy& tax, const ChainSchedule& schedule,
                           CrfMode mode, double soft_penalty = kSoftPenalty,
                           double hard_penalty = kHardPenalty);

double sequence_score(const EmissionMatrix& z, std::span<const LabelId> y,
                      const CrfParams& params);

double log_partition(const EmissionMatrix& z, const CrfParams& params);

struct Marginals {
  MatrixD node;               // l x m
  std::vector<MatrixD> edge;  // (l-1) slices of m x m
};

Marginals posterior_marginals(const EmissionMatrix& z, const CrfParams& params);

struct NllGradients {
  double nll = 0.0;
  MatrixD grad_z;                   // l x m
  MatrixD grad_transitions;         // m x m
  std::vector<double> grad_start;   // m
};

// Negative log-likelihood of the gold sequence and its gradients. Frozen
// entries get zero gradient.
NllGradients nll_and_grads(const EmissionMatrix& z, std::span<const LabelId> gold,
                           const CrfParams& params);

struct DecodeResult {
  std::vector<LabelId> sequence;
  LabelPath per_level;
  double score = 0.0;
  double log_partition = 0.0;
};

// Exact Viterbi. Among equal-scoring sequences the lexicographically
// smallest label-id sequence wins. per_level is read from the last slot of
// each level.
DecodeResult decode(const EmissionMatrix& z, const CrfParams& params,
                    const ChainSchedule& schedule);

// Transition-free head used when the CRF is ablated: every slot is an
// independent softmax over its allowed labels.
DecodeResult decode_independent(const EmissionMatrix& z, const CrfParams& params,
                                const ChainSchedule& schedule);
NllGradients independent_nll_and_grads(const EmissionMatrix& z,
                                       std::span<const LabelId> gold,
                                       const CrfParams& params);

double log_sum_exp(std::span<const double> values);

}  // namespace hiericrf
