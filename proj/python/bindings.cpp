#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "motiv/api.hpp"
#include "motiv/archive.hpp"
#include "motiv/errors.hpp"
#include "motiv/geo.hpp"
#include "motiv/pipeline.hpp"
#include "motiv/sentiment.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using DatasetPtr = std::shared_ptr<const motiv::Dataset>;

struct DatasetHandle {
  DatasetPtr ptr;
};

// Payloads cross the boundary as the same JSON text the server sends.
std::string body_or_throw(const motiv::api::Service& s, std::string_view method, std::string_view path,
                          const motiv::api::Query& query, std::string_view body) {
  const auto r = s.handle(method, path, query, body);
  if (r.status != 200) {
    const auto err = motiv::api::json::parse(r.body)["error"];
    throw motiv::api::ApiError(motiv::api::ErrorCode::kBadRequest,
                               std::to_string(r.status) + " " + err["code"].get<std::string>() + ": " +
                                   err["message"].get<std::string>());
  }
  return r.body;
}

std::vector<motiv::Polygon> rings_to_polygons(const std::vector<std::vector<std::pair<double, double>>>& rings) {
  std::vector<motiv::Polygon> out;
  for (const auto& ring : rings) {
    motiv::Polygon p;
    for (const auto& [x, y] : ring) p.outer.push_back({x, y});
    if (!p.outer.empty() && !(p.outer.front() == p.outer.back())) p.outer.push_back(p.outer.front());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Moral-frame tweet corpus analytics";

  py::register_exception<motiv::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<motiv::ModelError>(m, "ModelError", PyExc_ArithmeticError);
  py::register_exception<motiv::api::ApiError>(m, "ApiError", PyExc_RuntimeError);

  m.def(
      "score_text", [](const std::string& text) { return motiv::sentiment::score_text(text, motiv::sentiment::builtin_lexicon()); },
      "text"_a, "Lexicon sentiment in (-1, 1) with the built-in lexicon.");
  m.def(
      "classify", [](double score) { return std::string(motiv::to_string(motiv::sentiment::classify(score))); },
      "score"_a);
  m.def(
      "mercator",
      [](double lon, double lat) {
        const auto p = motiv::mercator(lon, lat);
        return std::make_pair(p.x, p.y);
      },
      "lon"_a, "lat"_a);
  m.def(
      "assign_county",
      [](std::tuple<double, double, double, double> bbox,
         const std::map<std::string, std::vector<std::vector<std::pair<double, double>>>>& counties,
         double threshold) -> py::object {
        std::vector<std::vector<motiv::Polygon>> polys;
        for (const auto& [fips, rings] : counties) polys.push_back(rings_to_polygons(rings));
        std::vector<motiv::CountyShape> shapes;
        std::size_t i = 0;
        for (const auto& [fips, rings] : counties) {
          shapes.push_back({fips, polys[i], motiv::bounds_of(polys[i])});
          ++i;
        }
        const auto [x0, y0, x1, y1] = bbox;
        const auto a = motiv::assign_county({x0, y0, x1, y1}, shapes, threshold);
        if (!a) return py::none();
        return py::make_tuple(a->fips, a->overlap_fraction);
      },
      "bbox"_a, "counties"_a, "threshold"_a = motiv::kDefaultOverlapThreshold,
      "County with the largest overlap of (min_lon, min_lat, max_lon, max_lat), or None.");

  py::class_<DatasetHandle>(m, "Dataset")
      .def_static("read", [](const std::string& path) { return DatasetHandle{motiv::archive::read(path)}; }, "path"_a)
      .def("write", [](const DatasetHandle& d, const std::string& path) { motiv::archive::write(path, *d.ptr); },
           "path"_a)
      .def_property_readonly("n_tweets", [](const DatasetHandle& d) { return d.ptr->tweets().size(); })
      .def_property_readonly("n_counties", [](const DatasetHandle& d) { return d.ptr->counties().size(); });

  m.def(
      "ingest",
      [](const std::string& tweets, const std::string& counties, const std::string& demographics,
         const std::string& covid, double overlap_threshold, const std::string& topic) {
        motiv::IngestOptions opt;
        opt.overlap_threshold = overlap_threshold;
        opt.topic = topic;
        py::gil_scoped_release release;
        auto r = motiv::ingest({tweets, counties, demographics, covid}, opt);
        return std::make_pair(DatasetHandle{r.dataset}, r.report.to_text());
      },
      "tweets"_a, "counties"_a, "demographics"_a, "covid"_a, "overlap_threshold"_a = motiv::kDefaultOverlapThreshold,
      "topic"_a = "", "Returns (dataset, report text).");

  py::class_<motiv::api::Service>(m, "Service")
      .def(py::init([](const DatasetHandle& d) { return motiv::api::Service(d.ptr); }), "dataset"_a)
      .def(
          "handle",
          [](const motiv::api::Service& s, const std::string& method, const std::string& path,
             const std::map<std::string, std::string>& query, const std::string& body) {
            const motiv::api::Query q(query.begin(), query.end());
            const auto r = s.handle(method, path, q, body);
            return std::make_pair(r.status, r.body);
          },
          "method"_a, "path"_a, "query"_a = std::map<std::string, std::string>{}, "body"_a = "",
          "Routes one request; returns (status, JSON body).")
      .def(
          "get",
          [](const motiv::api::Service& s, const std::string& path, const std::map<std::string, std::string>& query) {
            return body_or_throw(s, "GET", path, motiv::api::Query(query.begin(), query.end()), "");
          },
          "path"_a, "query"_a = std::map<std::string, std::string>{})
      .def(
          "gam",
          [](const motiv::api::Service& s, const std::string& spec) {
            return body_or_throw(s, "POST", "/api/gam", {}, spec);
          },
          "spec"_a);
}
