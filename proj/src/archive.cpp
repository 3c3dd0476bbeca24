#include "motiv/archive.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "motiv/csv.hpp"
#include "motiv/errors.hpp"
#include "motiv/numeric.hpp"

namespace motiv::archive {

using nlohmann::json;

namespace {

std::string opt_int(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_real(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string frames_field(const FrameSet& frames) {
  std::string out;
  frames.for_each([&](MoralFrame f) {
    if (!out.empty()) out += ';';
    out += name_of(f);
  });
  return out;
}

std::string tweets_csv(const Dataset& ds) {
  std::string out =
      "id,timestamp,text,retweet_count,stance,vividness,frames,min_lon,min_lat,max_lon,max_lat,"
      "county_fips,overlap_fraction,sentiment_score,sentiment_class\n";
  for (const Tweet& t : ds.tweets()) {
    out += csv::join({t.id, format_timestamp(t.timestamp), t.text, std::to_string(t.retweet_count),
                      std::string(to_string(t.stance)), t.vivid ? "1" : "0", frames_field(t.frames),
                      format_double(t.bbox.min_x), format_double(t.bbox.min_y), format_double(t.bbox.max_x),
                      format_double(t.bbox.max_y), t.county_fips.value_or(""), format_double(t.overlap_fraction),
                      format_double(t.sentiment_score), std::string(to_string(t.sentiment_class))});
    out += '\n';
  }
  return out;
}

json ring_json(const Ring& ring) {
  json r = json::array();
  for (const Point& p : ring) r.push_back({p.x, p.y});
  return r;
}

json polygon_json(const Polygon& poly) {
  json rings = json::array();
  rings.push_back(ring_json(poly.outer));
  for (const Ring& h : poly.holes) rings.push_back(ring_json(h));
  return rings;
}

json counties_geojson(const Dataset& ds) {
  json features = json::array();
  for (const auto& [fips, c] : ds.counties()) {
    json geom;
    if (c.polygons.size() == 1) {
      geom = {{"type", "Polygon"}, {"coordinates", polygon_json(c.polygons[0])}};
    } else {
      json coords = json::array();
      for (const Polygon& p : c.polygons) coords.push_back(polygon_json(p));
      geom = {{"type", "MultiPolygon"}, {"coordinates", coords}};
    }
    features.push_back(
        {{"type", "Feature"}, {"properties", {{"GEOID", fips}, {"NAME", c.name}}}, {"geometry", std::move(geom)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

std::string demographics_csv(const Dataset& ds) {
  std::string out = "fips,population,dem_votes,rep_votes,median_income,mask_usage\n";
  for (const auto& [fips, c] : ds.counties()) {
    if (c.demographics_missing) continue;
    const Demographics& d = c.demographics;
    out += csv::join({fips, opt_int(d.population), opt_int(d.dem_votes), opt_int(d.rep_votes),
                      opt_real(d.median_income), opt_real(d.mask_usage)});
    out += '\n';
  }
  return out;
}

std::string covid_csv(const Dataset& ds) {
  std::string out = "fips,date,cases,deaths\n";
  for (const auto& [fips, c] : ds.counties()) {
    for (const CovidPoint& p : c.covid_series) {
      out += fips + ',' + format_date(p.date) + ',' + std::to_string(p.cases) + ',' + std::to_string(p.deaths) + '\n';
    }
  }
  return out;
}

}  // namespace

std::string serialize(const Dataset& dataset) {
  json doc;
  doc["format"] = kFormat;
  doc["topic"] = dataset.topic();
  doc["tweets_csv"] = tweets_csv(dataset);
  doc["counties_geojson"] = counties_geojson(dataset);
  doc["demographics_csv"] = demographics_csv(dataset);
  doc["covid_csv"] = covid_csv(dataset);
  return doc.dump(1) + "\n";
}

std::shared_ptr<const Dataset> deserialize(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw InputError(std::string("dataset archive: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormat) {
    throw InputError("dataset archive: unsupported format (expected " + std::string(kFormat) + ")");
  }
  try {
    std::istringstream tweets_in(doc.at("tweets_csv").get<std::string>());
    TweetLoad tweets = load_tweets(tweets_in, {}, "archive:tweets_csv");
    if (tweets.rejected || tweets.dropped) {
      const std::string why = tweets.diagnostics.empty() ? "dropped rows" : tweets.diagnostics.front().message;
      throw InputError("dataset archive: corrupt tweet table: " + why);
    }
    std::istringstream counties_in(doc.at("counties_geojson").dump());
    const auto counties = load_counties(counties_in, "archive:counties_geojson");
    std::istringstream demo_in(doc.at("demographics_csv").get<std::string>());
    const auto demographics = load_demographics(demo_in, "archive:demographics_csv");
    std::istringstream covid_in(doc.at("covid_csv").get<std::string>());
    const auto covid = load_covid(covid_in, "archive:covid_csv");

    std::vector<std::optional<Assignment>> assignments;
    for (const Tweet& t : tweets.tweets) {
      if (!t.county_fips) throw InputError("dataset archive: tweet " + t.id + " has no county");
      assignments.push_back(Assignment{*t.county_fips, t.overlap_fraction});
    }
    BuildResult built = build_dataset(std::move(tweets.tweets), counties, demographics, covid, assignments,
                                      doc.at("topic").get<std::string>());
    if (built.excluded_unknown_county) throw InputError("dataset archive: tweets reference unknown counties");
    return built.dataset;
  } catch (const json::exception& e) {
    throw InputError(std::string("dataset archive: ") + e.what());
  }
}

std::string gzip(std::string_view data) {
  z_stream zs{};
  // windowBits 15 + 16 selects the gzip wrapper; header mtime stays 0.
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  std::string out;
  out.resize(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string gunzip(std::string_view data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw InputError("dataset archive: not a valid gzip stream");
    }
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw InputError("dataset archive: truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

void write(const std::filesystem::path& path, const Dataset& dataset) {
  const std::string bytes = gzip(serialize(dataset));
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::shared_ptr<const Dataset> read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(gunzip(ss.str()));
}

}  // namespace motiv::archive
