#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hiericrf/chain.hpp"
#include "hiericrf/corpus.hpp"
#include "hiericrf/crf.hpp"
#include "hiericrf/emission.hpp"
#include "hiericrf/error.hpp"
#include "hiericrf/fewshot.hpp"
#include "hiericrf/metrics.hpp"
#include "hiericrf/model.hpp"
#include "hiericrf/synthgen.hpp"
#include "hiericrf/trainer.hpp"

namespace py = pybind11;
using namespace hiericrf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

MatrixD to_matrix(const Array& a, const char* what) {
  if (a.ndim() != 2) throw InvalidArgument(std::string(what) + " must be 2-D");
  MatrixD m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const MatrixD& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

// CRF parameters from plain arrays; nothing frozen or masked.
CrfParams make_params(const Array& transitions, const std::vector<double>& start) {
  CrfParams p = CrfParams::neutral(static_cast<int>(start.size()));
  p.transitions = to_matrix(transitions, "transitions");
  p.start = start;
  if (p.transitions.rows() != start.size() || p.transitions.cols() != start.size()) {
    throw DimensionMismatch("transitions must be m x m with m = len(start)");
  }
  return p;
}

MatrixD emissions_for(const Array& z, const CrfParams& p) {
  MatrixD m = to_matrix(z, "z");
  if (static_cast<int>(m.cols()) != p.labels()) throw DimensionMismatch("z must have m columns");
  return m;
}

py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_hiericrf, m) {
  m.doc() = "Hierarchy-aware chain CRF core";

  static py::exception<Error> base(m, "HiericrfError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_property_readonly("name", &Taxonomy::name)
      .def_property_readonly("depth", &Taxonomy::depth)
      .def_property_readonly("label_count", &Taxonomy::label_count)
      .def_property_readonly("names",
                             [](const Taxonomy& t) {
                               std::vector<std::string> out;
                               for (const auto& n : t.nodes()) out.push_back(n.name);
                               return out;
                             })
      .def("level", &Taxonomy::level)
      .def("parent", [](const Taxonomy& t, LabelId id) { return t.node(id).parent; })
      .def("id_of", &Taxonomy::id_of)
      .def("path_to", &Taxonomy::path_to)
      .def("leaf_paths", &Taxonomy::leaf_paths)
      .def("to_json", [](const Taxonomy& t) { return serialize_taxonomy(t); });
  m.def("load_taxonomy", &load_taxonomy, py::arg("json_text"));
  m.def("load_taxonomy_file", &load_taxonomy_file, py::arg("path"));

  py::class_<ChainSchedule>(m, "ChainSchedule")
      .def_property_readonly("levels", &ChainSchedule::levels)
      .def_property_readonly("depth", &ChainSchedule::depth)
      .def_property_readonly("iterations", &ChainSchedule::iterations)
      .def("__len__", &ChainSchedule::length)
      .def("readout_positions", &ChainSchedule::readout_positions);
  m.def("build_schedule", &build_schedule, py::arg("depth"), py::arg("iterations") = kDefaultChainIterations);
  m.def("render_template", &render_template, py::arg("text"), py::arg("schedule"),
        py::arg("mask_token") = "[MASK]");
  m.def("golden_sequence", &golden_sequence, py::arg("path"), py::arg("schedule"));

  m.def(
      "hash_features",
      [](const std::string& text, std::size_t dim) {
        const FeatureVector fv = hash_features(text, dim);
        py::array_t<std::uint32_t> idx(fv.entries.size());
        py::array_t<double> val(fv.entries.size());
        for (std::size_t k = 0; k < fv.entries.size(); ++k) {
          idx.mutable_at(k) = fv.entries[k].first;
          val.mutable_at(k) = fv.entries[k].second;
        }
        return py::make_tuple(idx, val);
      },
      py::arg("text"), py::arg("dim") = kDefaultFeatureDim);

  m.def(
      "init_transitions",
      [](const Taxonomy& tax, const ChainSchedule& s, const std::string& mode) {
        const CrfParams p = init_transitions(tax, s, parse_crf_mode(mode));
        return py::make_tuple(to_array(p.transitions), p.start);
      },
      py::arg("taxonomy"), py::arg("schedule"), py::arg("mode") = "faithful");
  m.def(
      "log_partition",
      [](const Array& z, const Array& t, const std::vector<double>& start) {
        const CrfParams p = make_params(t, start);
        return log_partition(emissions_for(z, p), p);
      },
      py::arg("z"), py::arg("transitions"), py::arg("start"));
  m.def(
      "sequence_score",
      [](const Array& z, const std::vector<LabelId>& y, const Array& t, const std::vector<double>& start) {
        const CrfParams p = make_params(t, start);
        return sequence_score(emissions_for(z, p), y, p);
      },
      py::arg("z"), py::arg("y"), py::arg("transitions"), py::arg("start"));
  m.def(
      "viterbi",
      [](const Array& z, const Array& t, const std::vector<double>& start) {
        const CrfParams p = make_params(t, start);
        const MatrixD e = emissions_for(z, p);
        const DecodeResult r = decode(e, p, build_schedule(1, static_cast<int>(e.rows())));
        return py::make_tuple(r.sequence, r.score);
      },
      py::arg("z"), py::arg("transitions"), py::arg("start"));
  m.def(
      "marginals",
      [](const Array& z, const Array& t, const std::vector<double>& start) {
        const CrfParams p = make_params(t, start);
        const Marginals mg = posterior_marginals(emissions_for(z, p), p);
        py::list edges;
        for (const auto& e : mg.edge) edges.append(to_array(e));
        return py::make_tuple(to_array(mg.node), edges);
      },
      py::arg("z"), py::arg("transitions"), py::arg("start"));
  m.def(
      "nll_and_grads",
      [](const Array& z, const std::vector<LabelId>& gold, const Array& t, const std::vector<double>& start) {
        const CrfParams p = make_params(t, start);
        const NllGradients g = nll_and_grads(emissions_for(z, p), gold, p);
        return py::make_tuple(g.nll, to_array(g.grad_z), to_array(g.grad_transitions), g.grad_start);
      },
      py::arg("z"), py::arg("gold"), py::arg("transitions"), py::arg("start"));

  m.def(
      "evaluate",
      [](const std::vector<std::pair<std::vector<LabelId>, std::vector<LabelId>>>& samples,
         const Taxonomy& tax) {
        std::vector<EvalSample> s;
        for (const auto& [pred, gold] : samples) s.push_back({pred, gold});
        return to_python(metrics_to_json(evaluate(s, tax), tax));
      },
      py::arg("samples"), py::arg("taxonomy"), "samples: (pred ids, gold ids) pairs");

  py::class_<Example>(m, "Example")
      .def(py::init<std::string, std::string, LabelPath>(), py::arg("id"), py::arg("text"), py::arg("path"))
      .def_readwrite("id", &Example::id)
      .def_readwrite("text", &Example::text)
      .def_readwrite("path", &Example::path)
      .def("__eq__", [](const Example& a, const Example& b) { return a == b; });
  m.def("load_corpus", &load_corpus, py::arg("path"), py::arg("taxonomy"));
  m.def("write_corpus", &write_corpus, py::arg("path"), py::arg("examples"), py::arg("taxonomy"));
  m.def(
      "greedy_sample",
      [](const std::vector<Example>& corpus, const Taxonomy& tax, int k, std::uint64_t seed) {
        const SupportSet s = greedy_sample(corpus, tax, k, seed);
        return py::make_tuple(s.examples, s.short_paths);
      },
      py::arg("corpus"), py::arg("taxonomy"), py::arg("k"), py::arg("seed"),
      "Returns (examples, indices of leaf paths short of k).");

  m.def(
      "synth",
      [](const std::string& out_dir, int branching, int depth, int signature_tokens, int doc_tokens,
         double noise, int docs_per_path, std::uint64_t seed) {
        SynthSpec spec{branching, depth, signature_tokens, doc_tokens, noise, docs_per_path, seed};
        write_synth(out_dir, spec, generate(spec));
      },
      py::arg("out_dir"), py::arg("branching") = 3, py::arg("depth") = 3, py::arg("signature_tokens") = 3,
      py::arg("doc_tokens") = 30, py::arg("noise") = 0.3, py::arg("docs_per_path") = 8, py::arg("seed"));

  m.def(
      "store_emissions",
      [](const std::string& path, std::uint32_t labels, std::uint32_t slots,
         const std::vector<std::pair<std::string, Array>>& records) {
        std::vector<EmissionRecord> recs;
        for (const auto& [id, z] : records) recs.push_back({id, to_matrix(z, "logits")});
        store_emissions(path, labels, slots, recs);
      },
      py::arg("path"), py::arg("labels"), py::arg("slots"), py::arg("records"));
  m.def(
      "load_emissions",
      [](const std::string& path) {
        py::list out;
        for (const auto& r : load_emissions(path)) out.append(py::make_tuple(r.id, to_array(r.logits)));
        return out;
      },
      py::arg("path"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("schedule", [](const Model& md) { return md.schedule; })
      .def_property_readonly("transitions", [](const Model& md) { return to_array(md.crf.transitions); })
      .def_property_readonly("start", [](const Model& md) { return md.crf.start; })
      .def("predict",
           [](const Model& md, const std::string& text) {
             const DecodeResult r = md.predict(md.emissions(Example{"text", text, {}}, nullptr));
             return py::make_tuple(r.per_level, r.sequence, r.score);
           },
           py::arg("text"), "Returns (per-level path, slot sequence, score) for the built-in emitter.")
      .def("save", [](const Model& md, const std::string& path) { save_model(path, md); });
  m.def("load_model", &load_model, py::arg("path"));
  m.def(
      "train",
      [](const Taxonomy& tax, const std::vector<Example>& train, const std::vector<Example>& dev,
         std::uint64_t seed, int iterations, const std::string& mode, bool no_icrf, bool no_chain, int epochs,
         std::size_t feature_dim) {
        ModelOptions o;
        o.iterations = iterations;
        o.mode = parse_crf_mode(mode);
        o.no_icrf = no_icrf;
        o.no_chain = no_chain;
        o.feature_dim = feature_dim;
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.epochs = epochs;
        Model model = Model::initialize(tax, o);
        const TrainingLog log = fit(model, train, dev, tax, cfg);
        return py::make_tuple(model, to_python(log.to_json()));
      },
      py::arg("taxonomy"), py::arg("train"), py::arg("dev"), py::arg("seed"),
      py::arg("iterations") = kDefaultChainIterations, py::arg("mode") = "faithful", py::arg("no_icrf") = false,
      py::arg("no_chain") = false, py::arg("epochs") = 20, py::arg("feature_dim") = kDefaultFeatureDim);
  m.def(
      "evaluate_model",
      [](const Model& model, const std::vector<Example>& examples, const Taxonomy& tax) {
        return to_python(metrics_to_json(evaluate_model(model, examples, tax, nullptr, 1).metrics, tax));
      },
      py::arg("model"), py::arg("examples"), py::arg("taxonomy"));
}
