#pragma once

#include <memory>
#include <string>
#include <vector>

#include "motiv/pipeline.hpp"

namespace test_support {

inline std::string fixture(const std::string& name) { return std::string(MOTIV_FIXTURES) + "/" + name; }

inline motiv::IngestPaths fixture_paths() {
  return {fixture("tweets.csv"), fixture("counties.geojson"), fixture("demographics.csv"), fixture("covid.csv")};
}

inline motiv::IngestResult ingest_fixture(double threshold = motiv::kDefaultOverlapThreshold) {
  motiv::IngestOptions opt;
  opt.overlap_threshold = threshold;
  opt.topic = "stay-at-home";
  return motiv::ingest(fixture_paths(), opt);
}

inline motiv::Polygon unit_square(double x0, double y0) {
  return {{{x0, y0}, {x0 + 1, y0}, {x0 + 1, y0 + 1}, {x0, y0 + 1}, {x0, y0}}, {}};
}

/// Dataset over one county "01001" = [0,1]^2 holding `tweets` as given.
inline std::shared_ptr<const motiv::Dataset> single_county_dataset(std::vector<motiv::Tweet> tweets) {
  std::vector<motiv::CountyGeometry> counties{{"01001", "Only", {unit_square(0, 0)}}};
  std::vector<std::optional<motiv::Assignment>> assignments(tweets.size(), motiv::Assignment{"01001", 1.0});
  return motiv::build_dataset(std::move(tweets), counties, {}, {}, assignments).dataset;
}

}  // namespace test_support
