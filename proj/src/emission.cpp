#include "hiericrf/emission.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <cctype>
#include <map>
#include <type_traits>

#include "hiericrf/error.hpp"
#include "hiericrf/hash.hpp"

namespace hiericrf {

namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

void add_hashed(std::map<std::uint32_t, double>& acc, std::string_view key,
                std::size_t dim) {
  const std::uint64_t h = fnv1a64(key);
  const auto index = static_cast<std::uint32_t>(h & (dim - 1));
  acc[index] += (h >> 63) ? -1.0 : 1.0;
}

FeatureVector normalized(std::map<std::uint32_t, double>&& acc, std::size_t dim) {
  FeatureVector fv;
  fv.dim = dim;
  double sq = 0.0;
  for (const auto& [index, w] : acc) {
    if (w != 0.0) {
      fv.entries.emplace_back(index, w);
      sq += w * w;
    }
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : fv.entries) e.second *= inv;
  }
  return fv;
}

}  // namespace

double FeatureVector::norm() const {
  double sq = 0.0;
  for (const auto& e : entries) sq += e.second * e.second;
  return std::sqrt(sq);
}

double FeatureVector::dot(const FeatureVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

double cosine(const FeatureVector& a, const FeatureVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

FeatureVector hash_features(std::string_view text, std::size_t dim) {
  if (dim < 1024 || !std::has_single_bit(dim) || dim > (std::size_t{1} << 32)) {
    throw InvalidArgument("feature dimension must be a power of two in [2^10, 2^32]");
  }
  const auto tokens = tokenize(text);
  std::map<std::uint32_t, double> acc;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_hashed(acc, tokens[i], dim);
    if (i + 1 < tokens.size()) add_hashed(acc, tokens[i] + ' ' + tokens[i + 1], dim);
  }
  return normalized(std::move(acc), dim);
}

VerbalizerParams init_verbalizer(const Taxonomy& tax, std::size_t dim, double gain) {
  VerbalizerParams params{MatrixD(tax.label_count(), dim, 0.0)};
  for (const LabelNode& n : tax.nodes()) {
    const auto tokens = tokenize(n.name);
    if (tokens.empty()) continue;
    const double scale = gain / static_cast<double>(tokens.size());
    auto row = params.weights.row(n.id);
    for (const auto& tok : tokens) {
      for (const auto& [index, w] : hash_features(tok, dim).entries) {
        row[index] += scale * w;
      }
    }
  }
  return params;
}

FeatureMap init_feature_map(const Taxonomy& tax, std::size_t dim) {
  return {MatrixD(tax.label_count(), dim, 0.0),
          MatrixD(tax.label_count(), tax.depth(), 0.0)};
}

EmissionMatrix emit(const FeatureVector& features, const VerbalizerParams& params,
                    const ChainSchedule& schedule) {
  const MatrixD& u = params.weights;
  if (features.dim != u.cols()) {
    throw DimensionMismatch("features have dimension " + std::to_string(features.dim) +
                            ", verbalizer expects " + std::to_string(u.cols()));
  }
  const std::size_t m = u.rows();
  std::vector<double> logits(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    const auto row = u.row(y);
    double s = 0.0;
    for (const auto& [index, w] : features.entries) s += row[index] * w;
    logits[y] = s;
  }
  EmissionMatrix z(schedule.length(), m);
  for (int i = 0; i < schedule.length(); ++i) {
    std::copy(logits.begin(), logits.end(), z.row(i).begin());
  }
  return z;
}

EmissionMatrix emit(const FeatureVector& features, const VerbalizerParams& params,
                    const FeatureMap& feature_map, const ChainSchedule& schedule) {
  const std::size_t m = params.weights.rows();
  if (feature_map.adapter.rows() != m || feature_map.adapter.cols() != params.weights.cols() ||
      feature_map.slot_bias.rows() != m ||
      static_cast<int>(feature_map.slot_bias.cols()) < schedule.depth()) {
    throw DimensionMismatch("feature map shape does not match the verbalizer");
  }
  EmissionMatrix z = emit(features, params, schedule);
  std::vector<double> adapted(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    const auto row = feature_map.adapter.row(y);
    double s = 0.0;
    for (const auto& [index, w] : features.entries) s += row[index] * w;
    adapted[y] = s;
  }
  for (int i = 0; i < schedule.length(); ++i) {
    const int level = schedule[i];
    auto zi = z.row(i);
    for (std::size_t y = 0; y < m; ++y) {
      zi[y] += adapted[y] + feature_map.slot_bias(y, level - 1);
    }
  }
  return z;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'I', 'C', 'R', 'F', 'E', 'M', 'I', 'T'};

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, float>) {
    bits = std::bit_cast<std::uint32_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
  if constexpr (std::is_same_v<T, float>) {
    value = std::bit_cast<float>(static_cast<std::uint32_t>(bits));
  } else {
    value = static_cast<T>(bits);
  }
  return true;
}

}  // namespace

void store_emissions(const std::string& path, std::uint32_t labels, std::uint32_t slots,
                     const std::vector<EmissionRecord>& records) {
  for (const auto& r : records) {
    if (r.logits.rows() != slots || r.logits.cols() != labels) {
      throw ShapeError("record '" + r.id + "' is " + std::to_string(r.logits.rows()) + "x" +
                       std::to_string(r.logits.cols()) + ", header says " +
                       std::to_string(slots) + "x" + std::to_string(labels));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kEmissionsVersion);
  put_le<std::uint32_t>(out, labels);
  put_le<std::uint32_t>(out, slots);
  put_le<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.id.size()));
    out.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    for (const double v : r.logits.data()) put_le<float>(out, static_cast<float>(v));
  }
  if (!out) throw FormatError("write to '" + path + "' failed");
}

EmissionsReader::EmissionsReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw FormatError("cannot open emissions file '" + path + "'");
  char magic[8];
  if (!in_.read(magic, sizeof(magic))) throw TruncationError("'" + path + "' ends inside the header");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("'" + path + "' is not an emissions file (bad magic)");
  }
  std::uint32_t version = 0;
  if (!get_le(in_, version)) throw TruncationError("'" + path + "' ends inside the header");
  if (version != kEmissionsVersion) {
    throw FormatError("unsupported emissions version " + std::to_string(version));
  }
  if (!get_le(in_, header_.labels) || !get_le(in_, header_.slots) ||
      !get_le(in_, header_.count)) {
    throw TruncationError("'" + path + "' ends inside the header");
  }
  if (header_.labels == 0 || header_.slots == 0) {
    throw ShapeError("emissions header has zero labels or slots");
  }
}

std::optional<EmissionRecord> EmissionsReader::next() {
  if (read_ == header_.count) return std::nullopt;
  std::uint32_t id_len = 0;
  if (!get_le(in_, id_len)) {
    throw TruncationError("'" + path_ + "' holds " + std::to_string(read_) + " of " +
                          std::to_string(header_.count) + " records");
  }
  EmissionRecord rec;
  rec.id.resize(id_len);
  if (!in_.read(rec.id.data(), id_len)) throw TruncationError("'" + path_ + "' ends inside a record id");

  const std::size_t cells = std::size_t{header_.slots} * header_.labels;
  rec.logits = EmissionMatrix(header_.slots, header_.labels);
  for (std::size_t k = 0; k < cells; ++k) {
    float v = 0.0f;
    if (!get_le(in_, v)) {
      // A short payload cut at a row boundary is a shape problem, anything
      // else is a truncated file.
      if (k % header_.labels == 0 && k > 0 && in_.gcount() == 0) {
        throw ShapeError("record '" + rec.id + "' has " + std::to_string(k / header_.labels) +
                         " rows, header says " + std::to_string(header_.slots));
      }
      throw TruncationError("'" + path_ + "' ends inside record '" + rec.id + "'");
    }
    if (!std::isfinite(v)) throw FormatError("record '" + rec.id + "' has a non-finite logit");
    rec.logits.data()[k] = v;
  }
  ++read_;
  return rec;
}

std::vector<EmissionRecord> load_emissions(const std::string& path) {
  EmissionsReader reader(path);
  std::vector<EmissionRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

}  // namespace hiericrf
