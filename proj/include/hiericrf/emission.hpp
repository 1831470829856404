#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hiericrf/chain.hpp"
#include "hiericrf/matrix.hpp"
#include "hiericrf/taxonomy.hpp"

namespace hiericrf {

inline constexpr std::size_t kDefaultFeatureDim = std::size_t{1} << 15;

// Sparse L2-normalized feature vector over a hashed space of size dim.
// Entries are sorted by index with no duplicates.
struct FeatureVector {
  std::size_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  double dot(const FeatureVector& other) const;
};

double cosine(const FeatureVector& a, const FeatureVector& b);

// Lowercases ASCII and splits on anything that is not a letter, digit, or
// non-ASCII byte.
std::vector<std::string> tokenize(std::string_view text);

// Unigrams and space-joined bigrams, each hashed with 64-bit FNV-1a. The low
// bits select the bucket, bit 63 selects the sign.
FeatureVector hash_features(std::string_view text,
                            std::size_t dim = kDefaultFeatureDim);

// Label embedding matrix U (labels x dim), initialized from label names.
struct VerbalizerParams {
  MatrixD weights;
};

VerbalizerParams init_verbalizer(const Taxonomy& tax,
                                 std::size_t dim = kDefaultFeatureDim,
                                 double gain = 1.0);

// Trainable stand-in for encoder adaptation. `adapter` adds a label x dim
// linear term on the hashed features; `slot_bias` (labels x depth) adds a
// per-label score for the level named in the slot prompt.
struct FeatureMap {
  MatrixD adapter;
  MatrixD slot_bias;
};

FeatureMap init_feature_map(const Taxonomy& tax, std::size_t dim);

// Per-slot label logits, one row per schedule position.
using EmissionMatrix = MatrixD;

// U * features at every slot. Rows are identical.
EmissionMatrix emit(const FeatureVector& features, const VerbalizerParams& params,
                    const ChainSchedule& schedule);

// (U + adapter) * features plus the slot-level bias of each position.
EmissionMatrix emit(const FeatureVector& features, const VerbalizerParams& params,
                    const FeatureMap& feature_map, const ChainSchedule& schedule);

// ---------------------------------------------------------------------------
// Emissions file: "ICRFEMIT", u32 version, u32 m, u32 l, u64 count, then per
// example u32 id length, id bytes, l*m f32 logits (row-major). Little-endian.

inline constexpr std::uint32_t kEmissionsVersion = 1;

struct EmissionRecord {
  std::string id;
  EmissionMatrix logits;
};

struct EmissionsHeader {
  std::uint32_t labels = 0;
  std::uint32_t slots = 0;
  std::uint64_t count = 0;
};

void store_emissions(const std::string& path, std::uint32_t labels,
                     std::uint32_t slots,
                     const std::vector<EmissionRecord>& records);

// Streaming reader; yields records in file order.
class EmissionsReader {
 public:
  explicit EmissionsReader(const std::string& path);

  const EmissionsHeader& header() const noexcept { return header_; }
  std::optional<EmissionRecord> next();

 private:
  std::ifstream in_;
  std::string path_;
  EmissionsHeader header_;
  std::uint64_t read_ = 0;
};

std::vector<EmissionRecord> load_emissions(const std::string& path);

}  // namespace hiericrf
