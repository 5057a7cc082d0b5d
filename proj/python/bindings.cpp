#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <memory>
#include <sstream>

#include "geoflood/embed.hpp"
#include "geoflood/error.hpp"
#include "geoflood/geo.hpp"
#include "geoflood/pipeline.hpp"
#include "geoflood/serve.hpp"
#include "geoflood/stats.hpp"
#include "geoflood/synthetic.hpp"

namespace py = pybind11;
using namespace geoflood;
using nlohmann::json;

namespace {

MixConfig mix_arg(const std::string& mix_json) {
  return mix_json.empty() ? MixConfig{} : mix_from_json(json::parse(mix_json));
}

RoI roi_arg(const std::string& roi_json) {
  return roi_json.empty() ? default_roi() : roi_from_json(json::parse(roi_json));
}

std::shared_ptr<Geocoder> fixture_geocoder(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<Geocoder>(
      std::make_shared<FixtureBackend>(FixtureBackend::from_file(path)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "geoflood core bindings";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(code_name(e.code())), std::string(e.what()));
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  m.def("bbox_surface_km2",
        [](double west, double south, double east, double north) {
          return bbox_surface_km2(BBox(west, south, east, north));
        },
        py::arg("west"), py::arg("south"), py::arg("east"), py::arg("north"));

  m.def("correlate",
        [](const std::vector<double>& x, const std::vector<double>& y) {
          if (x.size() != y.size()) throw Error(ErrorCode::Validation, "x and y differ in length");
          return correlate(x, y).to_json().dump();
        },
        py::arg("x"), py::arg("y"));

  m.def("embed", [](const std::string& text, std::size_t dim, std::size_t n_min,
                    std::size_t n_max, std::uint64_t seed) {
    const auto v = embed_char_ngram(text, NgramHashing{dim, n_min, n_max, seed});
    return std::vector<double>(v.values().begin(), v.values().end());
  },
        py::arg("text"), py::arg("dim") = kDefaultEmbeddingDim, py::arg("n_min") = 1,
        py::arg("n_max") = 3, py::arg("seed") = 0);

  m.def("default_roi", [] { return roi_to_json(default_roi()).dump(); });

  m.def("synthesize",
        [](std::size_t n, std::uint64_t seed, const std::string& mix_json) {
          return generate_synthetic(n, mix_arg(mix_json), seed);
        },
        py::arg("n"), py::arg("seed") = 7, py::arg("mix_json") = "");

  m.def("geocoder_fixture",
        [](std::uint64_t seed, const std::string& mix_json) {
          return SyntheticGenerator(mix_arg(mix_json), seed).geocoder_fixture().dump();
        },
        py::arg("seed") = 7, py::arg("mix_json") = "");

  m.def("ingest",
        [](const std::string& input, const std::string& store) {
          std::ifstream in(input);
          if (!in) throw Error(ErrorCode::Io, "cannot read " + input);
          std::filesystem::create_directories(store);
          return run_ingest(in, StorePaths{store}).dump();
        },
        py::arg("input"), py::arg("store"));

  m.def("annotate",
        [](const std::string& store, const std::string& fixture) {
          auto g = fixture_geocoder(fixture);
          return run_annotate(StorePaths{store}, g.get()).dump();
        },
        py::arg("store"), py::arg("fixture") = "");

  m.def("postfilter",
        [](const std::string& store, const std::string& roi_json) {
          return run_postfilter(StorePaths{store}, roi_arg(roi_json)).dump();
        },
        py::arg("store"), py::arg("roi_json") = "");

  m.def("report",
        [](const std::string& store, double threshold_km2) {
          return build_report(StorePaths{store}, threshold_km2).dump();
        },
        py::arg("store"), py::arg("threshold_km2") = kDefaultThresholdKm2);

  py::class_<Api>(m, "Api")
      .def(py::init([](const std::string& store, const std::string& roi_json,
                       double threshold_km2) {
             ApiConfig cfg;
             cfg.threshold_km2 = threshold_km2;
             return std::make_unique<Api>(load_store(store), roi_arg(roi_json), cfg);
           }),
           py::arg("store"), py::arg("roi_json") = "",
           py::arg("threshold_km2") = kDefaultThresholdKm2)
      .def("handle",
           [](const Api& api, const std::string& path, const QueryParams& params) {
             ApiResponse r;
             {
               py::gil_scoped_release release;
               r = api.handle(path, params);
             }
             return py::make_tuple(r.status, r.body, r.headers);
           },
           py::arg("path"), py::arg("params") = QueryParams{});
}
