#include "hiericrf/model.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <thread>

#include "hiericrf/error.hpp"

namespace hiericrf {

ExternalEmissions ExternalEmissions::load(const std::string& path) {
  EmissionsReader reader(path);
  ExternalEmissions out;
  out.labels = reader.header().labels;
  out.slots = reader.header().slots;
  while (auto rec = reader.next()) {
    if (!out.by_id.emplace(rec->id, std::move(rec->logits)).second) {
      throw FormatError("duplicate example id '" + rec->id + "' in '" + path + "'");
    }
  }
  return out;
}

const EmissionMatrix& ExternalEmissions::at(const std::string& id) const {
  const auto it = by_id.find(id);
  if (it == by_id.end()) throw ShapeError("no emissions for example '" + id + "'");
  return it->second;
}

Model Model::initialize(const Taxonomy& tax, const ModelOptions& options) {
  Model m;
  m.options = options;
  m.taxonomy_fingerprint = tax.fingerprint();
  m.taxonomy_name = tax.name();
  m.schedule = ChainSchedule::build(tax.depth(), options.effective_iterations());
  m.crf = init_transitions(tax, m.schedule, options.mode, options.soft_penalty,
                           options.hard_penalty);
  if (options.emitter == EmitterKind::kSurrogate) {
    m.verbalizer = init_verbalizer(tax, options.feature_dim, options.verbalizer_gain);
    m.feature_map = init_feature_map(tax, options.feature_dim);
  }
  return m;
}

void Model::check_taxonomy(const Taxonomy& tax) const {
  if (tax.fingerprint() != taxonomy_fingerprint) {
    throw ValidationError("taxonomy does not match the one the model was built for");
  }
}

void Model::check_emissions(const ExternalEmissions* external) const {
  if (options.emitter != EmitterKind::kExternal) return;
  if (!external) throw InvalidArgument("model expects an emissions file (--emissions)");
  if (static_cast<int>(external->labels) != labels() ||
      static_cast<int>(external->slots) != schedule.length()) {
    throw ShapeError("emissions file is " + std::to_string(external->slots) + "x" +
                     std::to_string(external->labels) + ", model expects " +
                     std::to_string(schedule.length()) + "x" + std::to_string(labels()));
  }
}

EmissionMatrix Model::emissions(const FeatureVector& features) const {
  return emit(features, verbalizer, feature_map, schedule);
}

EmissionMatrix Model::emissions(const Example& ex, const ExternalEmissions* external) const {
  if (options.emitter == EmitterKind::kSurrogate) {
    return emissions(hash_features(ex.text, options.feature_dim));
  }
  if (!external) throw InvalidArgument("model expects an emissions file (--emissions)");
  const EmissionMatrix& z = external->at(ex.id);
  if (static_cast<int>(z.cols()) != labels() || static_cast<int>(z.rows()) != schedule.length()) {
    throw ShapeError("emissions for '" + ex.id + "' are " + std::to_string(z.rows()) + "x" +
                     std::to_string(z.cols()) + ", model expects " +
                     std::to_string(schedule.length()) + "x" + std::to_string(labels()));
  }
  return z;
}

DecodeResult Model::predict(const EmissionMatrix& z) const {
  return uses_crf() ? decode(z, crf, schedule) : decode_independent(z, crf, schedule);
}

EvalOutcome evaluate_model(const Model& model, const std::vector<Example>& examples,
                           const Taxonomy& tax, const ExternalEmissions* external,
                           int threads) {
  model.check_emissions(external);
  EvalOutcome out;
  out.predictions.resize(examples.size());
  const std::size_t n = examples.size();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, n));

  auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += workers) {
      out.predictions[i] = {examples[i].id, model.predict(model.emissions(examples[i], external))};
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<EvalSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples.push_back({out.predictions[i].result.per_level, examples[i].path});
  }
  out.metrics = evaluate(samples, tax);
  return out;
}

int thread_cap_from_env() {
  const char* env = std::getenv("HIERICRF_THREADS");
  if (!env || !*env) return 1;
  const int v = std::atoi(env);
  return v > 0 ? v : 1;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[8] = {'I', 'C', 'R', 'F', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kModelVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw TruncationError("'" + path + "' is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw TruncationError("'" + path + "' is truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& values) {
  for (const double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void get_doubles(std::istream& in, std::vector<double>& values, const std::string& path) {
  for (double& v : values) v = std::bit_cast<double>(get_u64(in, path));
}

void put_bytes(std::ostream& out, const std::vector<std::uint8_t>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size()));
}

void get_bytes(std::istream& in, std::vector<std::uint8_t>& values, const std::string& path) {
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size()))) {
    throw TruncationError("'" + path + "' is truncated");
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_model(const std::string& path, const Model& model) {
  const ModelOptions& o = model.options;
  nlohmann::ordered_json h;
  h["format"] = "hiericrf-model";
  h["version"] = kModelVersion;
  h["taxonomy"] = {{"name", model.taxonomy_name},
                   {"fingerprint", hex64(model.taxonomy_fingerprint)}};
  h["labels"] = model.labels();
  h["depth"] = model.schedule.depth();
  h["iterations"] = o.iterations;
  h["no_chain"] = o.no_chain;
  h["no_icrf"] = o.no_icrf;
  h["slots"] = model.schedule.length();
  h["mode"] = std::string(to_string(o.mode));
  h["soft_penalty"] = o.soft_penalty;
  h["hard_penalty"] = o.hard_penalty;
  h["emitter"] = o.emitter == EmitterKind::kSurrogate ? "surrogate" : "external";
  h["feature_dim"] = o.emitter == EmitterKind::kSurrogate ? o.feature_dim : 0;
  h["verbalizer_gain"] = o.verbalizer_gain;
  h["label_levels"] = model.crf.label_levels;
  h["provenance"] = model.provenance;
  const std::string header = h.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(kModelMagic, sizeof(kModelMagic));
  put_u32(out, kModelVersion);
  put_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  put_doubles(out, model.verbalizer.weights.data());
  put_doubles(out, model.feature_map.adapter.data());
  put_doubles(out, model.feature_map.slot_bias.data());
  put_doubles(out, model.crf.transitions.data());
  put_doubles(out, model.crf.start);
  put_bytes(out, model.crf.frozen.data());
  put_bytes(out, model.crf.start_frozen);
  if (!out) throw FormatError("write to '" + path + "' failed");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file '" + path + "'");
  char magic[8];
  if (!in.read(magic, 8)) throw TruncationError("'" + path + "' is truncated");
  if (std::memcmp(magic, kModelMagic, 8) != 0) throw FormatError("'" + path + "' is not a model file");
  if (const auto v = get_u32(in, path); v != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(v));
  }
  const std::uint64_t header_len = get_u64(in, path);
  if (header_len > (std::uint64_t{1} << 30)) throw FormatError("implausible model header length");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw TruncationError("'" + path + "' is truncated");
  }

  Model model;
  try {
    const auto h = nlohmann::ordered_json::parse(header);
    ModelOptions& o = model.options;
    o.iterations = h.at("iterations").get<int>();
    o.no_chain = h.at("no_chain").get<bool>();
    o.no_icrf = h.at("no_icrf").get<bool>();
    o.mode = parse_crf_mode(h.at("mode").get<std::string>());
    o.soft_penalty = h.at("soft_penalty").get<double>();
    o.hard_penalty = h.at("hard_penalty").get<double>();
    o.emitter = h.at("emitter").get<std::string>() == "surrogate" ? EmitterKind::kSurrogate
                                                                 : EmitterKind::kExternal;
    o.feature_dim = h.at("feature_dim").get<std::size_t>();
    o.verbalizer_gain = h.at("verbalizer_gain").get<double>();
    model.taxonomy_name = h.at("taxonomy").at("name").get<std::string>();
    model.taxonomy_fingerprint =
        std::stoull(h.at("taxonomy").at("fingerprint").get<std::string>(), nullptr, 16);
    model.provenance = h.at("provenance");

    const int m = h.at("labels").get<int>();
    const int depth = h.at("depth").get<int>();
    model.schedule = ChainSchedule::build(depth, o.effective_iterations());
    if (model.schedule.length() != h.at("slots").get<int>()) {
      throw FormatError("model slot count disagrees with its schedule");
    }
    CrfParams& crf = model.crf;
    crf = CrfParams::neutral(m);
    crf.mode = o.mode;
    crf.soft_penalty = o.soft_penalty;
    crf.hard_penalty = o.hard_penalty;
    crf.label_levels = h.at("label_levels").get<std::vector<int>>();
    if (static_cast<int>(crf.label_levels.size()) != m) throw FormatError("label level table has wrong size");
    if (o.mode == CrfMode::kStrict) crf.slot_levels = model.schedule.levels();

    const std::size_t r = o.emitter == EmitterKind::kSurrogate ? o.feature_dim : 0;
    const std::size_t bias_cols = r ? static_cast<std::size_t>(depth) : 0;
    model.verbalizer.weights = MatrixD(m, r);
    model.feature_map.adapter = MatrixD(m, r);
    model.feature_map.slot_bias = MatrixD(r ? m : 0, bias_cols);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }

  get_doubles(in, model.verbalizer.weights.data(), path);
  get_doubles(in, model.feature_map.adapter.data(), path);
  get_doubles(in, model.feature_map.slot_bias.data(), path);
  get_doubles(in, model.crf.transitions.data(), path);
  get_doubles(in, model.crf.start, path);
  get_bytes(in, model.crf.frozen.data(), path);
  get_bytes(in, model.crf.start_frozen, path);
  return model;
}

}  // namespace hiericrf
