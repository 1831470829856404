#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include "../support/fixtures.hpp"
#include "../support/temp_dir.hpp"
#include "hiericrf/emission.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/rng.hpp"

using namespace hiericrf;

namespace {

std::string random_word(Rng& rng) {
  std::string w;
  for (int i = 0; i < 6; ++i) w += static_cast<char>('a' + rng.below(26));
  return w;
}

}  // namespace

TEST_CASE("tokenizer lowercases and splits on punctuation") {
  CHECK(tokenize("Quantum-Physics, paper!") == std::vector<std::string>{"quantum", "physics", "paper"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("empty text hashes to the zero vector") {
  const FeatureVector fv = hash_features("");
  CHECK(fv.entries.empty());
  CHECK(fv.norm() == 0.0);
}

TEST_CASE("hashing is deterministic and L2-normalized") {
  const FeatureVector a = hash_features("quantum physics paper");
  const FeatureVector b = hash_features("quantum physics paper");
  CHECK(a.entries == b.entries);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& [index, w] : a.entries) {
    CHECK(index < kDefaultFeatureDim);
    CHECK(std::isfinite(w));
  }
}

TEST_CASE("same unigram and bigram multisets give identical vectors") {
  const FeatureVector a = hash_features("a b a c a");
  const FeatureVector b = hash_features("a c a b a");
  CHECK(a.entries == b.entries);
}

TEST_CASE("hashed features separate unrelated texts") {
  Rng rng(3);
  std::vector<std::vector<std::string>> vocabularies(30);
  for (auto& v : vocabularies) {
    for (int i = 0; i < 12; ++i) v.push_back(random_word(rng));
  }
  std::vector<FeatureVector> docs;
  for (const auto& v : vocabularies) {
    std::string text;
    for (int t = 0; t < 40; ++t) text += v[rng.below(v.size())] + " ";
    docs.push_back(hash_features(text));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) worst = std::max(worst, std::abs(cosine(docs[i], docs[j])));
  }
  CHECK(worst < 0.5);
}

TEST_CASE("feature dimension must be a power of two >= 2^10") {
  CHECK_THROWS_AS(hash_features("x", 1000), InvalidArgument);
  CHECK_THROWS_AS(hash_features("x", 512), InvalidArgument);
  CHECK_NOTHROW(hash_features("x", 1024));
}

TEST_CASE("verbalizer rows average the label-name token vectors") {
  const Taxonomy tax = load_taxonomy(R"({"labels":[
    {"name":"physics","level":1,"parent":null},
    {"name":"Computer Science","level":1,"parent":null}]})");
  const VerbalizerParams v = init_verbalizer(tax, 1024);

  const FeatureVector physics = hash_features("physics", 1024);
  for (const auto& [index, w] : physics.entries) CHECK(v.weights(0, index) == w);
  double row0 = 0.0;
  for (const double x : v.weights.row(0)) row0 += std::abs(x);
  CHECK(row0 == doctest::Approx(1.0));

  const FeatureVector computer = hash_features("computer", 1024);
  const FeatureVector science = hash_features("science", 1024);
  std::vector<double> expected(1024, 0.0);
  for (const auto& [index, w] : computer.entries) expected[index] += 0.5 * w;
  for (const auto& [index, w] : science.entries) expected[index] += 0.5 * w;
  for (std::size_t k = 0; k < 1024; ++k) CHECK(v.weights(1, k) == expected[k]);

  const VerbalizerParams scaled = init_verbalizer(tax, 1024, 3.0);
  for (const auto& [index, w] : physics.entries) CHECK(scaled.weights(0, index) == 3.0 * w);
}

TEST_CASE("labels with disjoint names get nearly orthogonal rows") {
  Rng rng(17);
  nlohmann::json labels = nlohmann::json::array();
  for (int i = 0; i < 60; ++i) {
    labels.push_back({{"name", random_word(rng) + " " + random_word(rng)}, {"level", 1}, {"parent", nullptr}});
  }
  const Taxonomy tax = load_taxonomy(nlohmann::json{{"labels", labels}}.dump());
  const VerbalizerParams v = init_verbalizer(tax);
  double worst = 0.0;
  for (int a = 0; a < tax.label_count(); ++a) {
    for (int b = a + 1; b < tax.label_count(); ++b) {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t k = 0; k < v.weights.cols(); ++k) {
        dot += v.weights(a, k) * v.weights(b, k);
        na += v.weights(a, k) * v.weights(a, k);
        nb += v.weights(b, k) * v.weights(b, k);
      }
      worst = std::max(worst, std::abs(dot / std::sqrt(na * nb)));
    }
  }
  CHECK(worst < 0.05);
}

TEST_CASE("emit is linear with identical rows") {
  const Taxonomy tax = fixtures::small_two_level();
  const VerbalizerParams v = init_verbalizer(tax, 1024);
  const ChainSchedule s = build_schedule(2, 2);

  const EmissionMatrix zero = emit(FeatureVector{1024, {}}, v, s);
  for (const double x : zero.data()) CHECK(x == 0.0);

  FeatureVector f = hash_features("a b c x y", 1024);
  const EmissionMatrix z1 = emit(f, v, s);
  for (auto& e : f.entries) e.second *= 2.0;
  const EmissionMatrix z2 = emit(f, v, s);
  REQUIRE(z1.rows() == 5);
  REQUIRE(z1.cols() == 5);
  for (std::size_t k = 0; k < z1.size(); ++k) CHECK(z2.data()[k] == doctest::Approx(2.0 * z1.data()[k]));
  for (std::size_t i = 1; i < z1.rows(); ++i) {
    for (std::size_t y = 0; y < z1.cols(); ++y) CHECK(z1(i, y) == z1(0, y));
  }

  CHECK_THROWS_AS(emit(hash_features("a", 2048), v, s), DimensionMismatch);
}

TEST_CASE("feature map adds the adapter term and a per-level slot bias") {
  const Taxonomy tax = fixtures::small_two_level();
  const VerbalizerParams v = init_verbalizer(tax, 1024);
  FeatureMap fm = init_feature_map(tax, 1024);
  const ChainSchedule s = build_schedule(2, 2);
  const FeatureVector f = hash_features("a b", 1024);

  const EmissionMatrix base = emit(f, v, s);
  CHECK(emit(f, v, fm, s) == base);

  fm.slot_bias(tax.id_of("B"), 1) = 2.5;
  const auto [index, w] = f.entries.front();
  fm.adapter(tax.id_of("X"), index) = 1.0;
  const EmissionMatrix z = emit(f, v, fm, s);
  for (int i = 0; i < s.length(); ++i) {
    CHECK(z(i, tax.id_of("B")) == doctest::Approx(base(i, tax.id_of("B")) + (s[i] == 2 ? 2.5 : 0.0)));
    CHECK(z(i, tax.id_of("X")) == doctest::Approx(base(i, tax.id_of("X")) + w));
  }
}

TEST_CASE("emissions file round-trips f32 payloads bit-exactly") {
  fixtures::TempDir dir;
  Rng rng(8);
  std::vector<EmissionRecord> records;
  for (int r = 0; r < 3; ++r) {
    EmissionRecord rec{"doc-" + std::to_string(r) + "-ü", EmissionMatrix(5, 7)};
    for (double& v : rec.logits.data()) v = static_cast<float>(rng.uniform(-30.0, 30.0));
    records.push_back(rec);
  }
  const std::string path = dir.file("e.bin");
  store_emissions(path, 7, 5, records);
  const auto back = load_emissions(path);
  REQUIRE(back.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(back[r].id == records[r].id);
    CHECK(std::memcmp(back[r].logits.data().data(), records[r].logits.data().data(),
                      records[r].logits.size() * sizeof(double)) == 0);
  }

  EmissionsReader reader(path);
  CHECK(reader.header().labels == 7);
  CHECK(reader.header().slots == 5);
  CHECK(reader.header().count == 3);

  store_emissions(dir.file("empty.bin"), 7, 5, {});
  CHECK(load_emissions(dir.file("empty.bin")).empty());
}

TEST_CASE("emissions file layout is the documented little-endian format") {
  fixtures::TempDir dir;
  EmissionMatrix z(1, 2);
  z(0, 0) = 1.0;
  z(0, 1) = -2.0;
  store_emissions(dir.file("e.bin"), 2, 1, {{"ab", z}});
  std::ifstream in(dir.file("e.bin"), std::ios::binary);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  const std::vector<unsigned char> expected = {
      'I', 'C', 'R', 'F', 'E', 'M', 'I', 'T',  // magic
      1, 0, 0, 0,                              // version
      2, 0, 0, 0,                              // m
      1, 0, 0, 0,                              // l
      1, 0, 0, 0, 0, 0, 0, 0,                  // count
      2, 0, 0, 0, 'a', 'b',                    // id
      0x00, 0x00, 0x80, 0x3f,                  // 1.0f
      0x00, 0x00, 0x00, 0xc0};                 // -2.0f
  CHECK(bytes == expected);
}

TEST_CASE("emissions reader errors") {
  fixtures::TempDir dir;

  SUBCASE("short payload is a shape error") {
    // Header claims 141 labels x 5 slots but only 4 rows follow.
    std::ofstream out(dir.file("short.bin"), std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    out.write("ICRFEMIT", 8);
    u32(1);
    u32(141);
    u32(5);
    u64(1);
    u32(1);
    out.write("x", 1);
    const float zero = 0.0f;
    for (int k = 0; k < 4 * 141; ++k) out.write(reinterpret_cast<const char*>(&zero), 4);
    out.close();
    CHECK_THROWS_AS(load_emissions(dir.file("short.bin")), ShapeError);
  }
  SUBCASE("bad magic") {
    std::ofstream(dir.file("bad.bin"), std::ios::binary) << "NOTEMITS....";
    CHECK_THROWS_AS(load_emissions(dir.file("bad.bin")), FormatError);
  }
  SUBCASE("bad version") {
    std::ofstream out(dir.file("v.bin"), std::ios::binary);
    out.write("ICRFEMIT", 8);
    const std::uint32_t v = 7;
    out.write(reinterpret_cast<const char*>(&v), 4);
    out.close();
    CHECK_THROWS_AS(load_emissions(dir.file("v.bin")), FormatError);
  }
  SUBCASE("truncated mid-record") {
    store_emissions(dir.file("t.bin"), 3, 2, {{"a", EmissionMatrix(2, 3)}, {"b", EmissionMatrix(2, 3)}});
    std::filesystem::resize_file(dir.file("t.bin"), std::filesystem::file_size(dir.file("t.bin")) - 6);
    CHECK_THROWS_AS(load_emissions(dir.file("t.bin")), TruncationError);
  }
  SUBCASE("missing records") {
    store_emissions(dir.file("m.bin"), 3, 2, {{"a", EmissionMatrix(2, 3)}, {"b", EmissionMatrix(2, 3)}});
    const auto size = std::filesystem::file_size(dir.file("m.bin"));
    std::filesystem::resize_file(dir.file("m.bin"), size - (4 + 1 + 24));
    CHECK_THROWS_AS(load_emissions(dir.file("m.bin")), TruncationError);
  }
  SUBCASE("writer rejects mismatched shapes") {
    CHECK_THROWS_AS(store_emissions(dir.file("w.bin"), 3, 2, {{"a", EmissionMatrix(3, 3)}}), ShapeError);
  }
}
