#include <fstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "saattack/experiment.hpp"
#include "saattack/image_attack.hpp"
#include "saattack/io.hpp"
#include "saattack/serialization.hpp"

namespace py = pybind11;
using namespace saattack;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageTensor to_image(const Array& a) {
  if (a.ndim() != 3) throw ShapeError("image must be an (H, W, C) array");
  const ImageShape shape{static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                         static_cast<int>(a.shape(2))};
  return ImageTensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array from_image(const ImageTensor& x) {
  Array out({x.height(), x.width(), x.channels()});
  std::copy(x.values().begin(), x.values().end(), out.mutable_data());
  return out;
}

Array from_embedding(const EmbeddingVector& e) {
  Array out(static_cast<py::ssize_t>(e.dim()));
  std::copy(e.values().begin(), e.values().end(), out.mutable_data());
  return out;
}

// Python dicts cross the boundary as JSON text.
Json to_json_value(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

AttackConfig config_from(const py::object& o) {
  return o.is_none() ? AttackConfig{} : attack_config_from_json(to_json_value(o));
}

const Lexicon& default_lexicon() {
  static const Lexicon lex = Lexicon::parse(bundled_lexicon_text());
  return lex;
}

py::dict pair_to_dict(const AdversarialPair& p) {
  py::dict d;
  d["x_adv"] = from_image(p.x_adv);
  d["t_adv"] = p.t_adv.join();
  d["t_inter"] = p.t_inter.join();
  d["method"] = p.provenance.method;
  d["seed"] = p.provenance.seed;
  d["source"] = p.provenance.source;
  return d;
}

}  // namespace

PYBIND11_MODULE(_saattack, m) {
  m.doc() = "Bindings for the saattack multimodal adversarial attack library";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_TypeError);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);

  py::class_<Lexicon>(m, "Lexicon")
      .def_static("parse", &Lexicon::parse, py::arg("text"))
      .def_static("load", &Lexicon::load, py::arg("path"))
      .def_static("bundled", &default_lexicon, py::return_value_policy::reference)
      .def("synonyms", &Lexicon::synonyms, py::arg("token"))
      .def("__contains__", &Lexicon::contains)
      .def("__len__", &Lexicon::size);

  py::class_<ToyDualEncoder>(m, "ToyEncoder")
      .def(py::init([](std::uint64_t seed, std::vector<std::string> vocabulary, int patch_size,
                       int embedding_dim, std::tuple<int, int, int> image_shape,
                       std::uint64_t concept_seed) {
             ToyEncoderSpec spec;
             spec.seed = seed;
             spec.patch_size = patch_size;
             spec.embedding_dim = embedding_dim;
             spec.image_shape = {std::get<0>(image_shape), std::get<1>(image_shape),
                                 std::get<2>(image_shape)};
             spec.concept_seed = concept_seed;
             return ToyDualEncoder(spec, vocabulary);
           }),
           py::arg("seed"), py::arg("vocabulary"), py::arg("patch_size") = 8,
           py::arg("embedding_dim") = 32, py::arg("image_shape") = std::tuple<int, int, int>{32, 32, 3},
           py::arg("concept_seed") = 0)
      .def_property_readonly("embedding_dim", &ToyDualEncoder::embedding_dim)
      .def("describe", &ToyDualEncoder::describe)
      .def("encode_image", [](const ToyDualEncoder& e, const Array& x) {
        return from_embedding(e.encode_image(to_image(x)));
      })
      .def("encode_text", [](const ToyDualEncoder& e, const std::string& caption) {
        return from_embedding(e.encode_text(TextSample::tokenize(caption)));
      });

  m.def("default_config", [] { return to_py(to_json(AttackConfig{})); },
        "Default attack configuration as a dict.");

  m.def("bundled_vocabulary", [] { return lexicon_vocabulary(default_lexicon()); });

  m.def(
      "attack",
      [](const std::string& method, const Array& image, const std::string& caption,
         const ToyDualEncoder& enc, const py::object& config, std::uint64_t seed,
         const Lexicon* lexicon) {
        const auto cfg = config_from(config);
        cfg.validate();
        const auto x = to_image(image);
        const auto t = TextSample::tokenize(caption);
        const auto kind = parse_attack_method(method);
        const Lexicon& lex = lexicon ? *lexicon : default_lexicon();
        std::optional<AdversarialPair> p;
        {
          py::gil_scoped_release release;
          RandomStream rng(seed);
          p = run_attack(kind, x, t, enc, cfg, lex, rng);
        }
        return pair_to_dict(*p);
      },
      py::arg("method"), py::arg("image"), py::arg("caption"), py::arg("encoder"),
      py::arg("config") = py::none(), py::arg("seed") = 0, py::arg("lexicon") = nullptr,
      "Craft one adversarial (image, caption) pair. method is sa, pgd_only, text_only or sep.");

  m.def(
      "eda_augment",
      [](const std::string& caption, int n, std::uint64_t seed, const Lexicon* lexicon) {
        RandomStream rng(seed);
        std::vector<std::string> out;
        for (const auto& t : eda_augment(TextSample::tokenize(caption), n,
                                         lexicon ? *lexicon : default_lexicon(), rng)) {
          out.push_back(t.join());
        }
        return out;
      },
      py::arg("caption"), py::arg("n"), py::arg("seed") = 0, py::arg("lexicon") = nullptr);

  m.def(
      "sia_augment",
      [](const Array& image, int n, std::uint64_t seed, std::tuple<int, int> grid) {
        RandomStream rng(seed);
        std::vector<Array> out;
        for (const auto& v : sia_augment(to_image(image), n, {std::get<0>(grid), std::get<1>(grid)}, rng)) {
          out.push_back(from_image(v));
        }
        return out;
      },
      py::arg("image"), py::arg("n"), py::arg("seed") = 0,
      py::arg("grid") = std::tuple<int, int>{3, 3});

  m.def("project_linf", [](const Array& x, const Array& ref, double eps) {
    return from_image(project_linf(to_image(x), to_image(ref), eps));
  }, py::arg("x"), py::arg("reference"), py::arg("eps"));

  m.def("cosine_similarity", [](const std::vector<double>& u, const std::vector<double>& v) {
    return cosine_similarity(EmbeddingVector(u), EmbeddingVector(v));
  });

  m.def(
      "retrieve_topk",
      [](const std::vector<double>& query, const std::vector<std::pair<std::string, std::vector<double>>>& gallery,
         int k) {
        RetrievalGallery g;
        for (const auto& [id, v] : gallery) g.add(id, EmbeddingVector(v));
        return retrieve_topk(EmbeddingVector(query), g, k);
      },
      py::arg("query"), py::arg("gallery"), py::arg("k"),
      "Ids of the k gallery items most similar to the query, ties broken by id.");

  m.def("read_png", [](const std::filesystem::path& p) { return from_image(read_png(p)); });
  m.def("write_png", [](const std::filesystem::path& p, const Array& x) { write_png(p, to_image(x)); });

  m.def(
      "write_toy_dataset",
      [](const std::filesystem::path& dir, int entries, std::uint64_t seed, int caption_length) {
        ToyDatasetSpec spec;
        spec.entries = entries;
        spec.seed = seed;
        spec.caption_length = caption_length;
        write_toy_dataset(dir, spec, bundled_lexicon_text());
        return dir / "config.json";
      },
      py::arg("dir"), py::arg("entries") = 64, py::arg("seed") = 0, py::arg("caption_length") = 5,
      "Write a synthetic dataset with a ready-to-run config; returns the config path.");

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, const py::object& overrides) {
        auto j = Json::parse(std::ifstream(config));
        if (!overrides.is_none()) j.merge_patch(to_json_value(overrides));
        const auto cfg = experiment_config_from_json(j, config.parent_path());
        std::vector<AttackReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_experiment(cfg);
        }
        py::list out;
        for (const auto& r : reports) out.append(to_py(to_json(r)));
        return out;
      },
      py::arg("config"), py::arg("overrides") = py::none(),
      "Run every configured method and evaluation cell; returns the reports as dicts. "
      "overrides is merged into the config JSON first.");

  m.def("summary_csv", [](const std::filesystem::path& dir) { return summary_csv(load_reports(dir)); });
}
