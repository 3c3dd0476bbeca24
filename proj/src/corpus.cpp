#include "motiv/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "motiv/csv.hpp"
#include "motiv/errors.hpp"
#include "motiv/numeric.hpp"

namespace motiv {

using nlohmann::json;

std::optional<MoralFrame> parse_frame(std::string_view name) {
  const std::string lower = to_lower(trim(name));
  for (const auto& fi : kFrames) {
    if (to_lower(fi.name) == lower) return fi.frame;
  }
  return std::nullopt;
}

std::string_view to_string(Stance s) { return s == Stance::kFor ? "for" : "against"; }

std::string_view to_string(SentimentClass c) {
  switch (c) {
    case SentimentClass::kPositive: return "positive";
    case SentimentClass::kNeutral: return "neutral";
    case SentimentClass::kNegative: return "negative";
  }
  return "neutral";
}

std::optional<Stance> parse_stance(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "for") return Stance::kFor;
  if (t == "against") return Stance::kAgainst;
  return std::nullopt;
}

std::optional<SentimentClass> parse_sentiment_class(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "positive") return SentimentClass::kPositive;
  if (t == "neutral") return SentimentClass::kNeutral;
  if (t == "negative") return SentimentClass::kNegative;
  return std::nullopt;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

std::optional<bool> parse_flag(std::string_view s) {
  const std::string t = to_lower(trim(s));
  if (t == "1" || t == "true") return true;
  if (t == "0" || t == "false") return false;
  return std::nullopt;
}

struct RowError {
  std::string message;
};

enum class RowOutcome { kKept, kDropped, kRejected };

struct TweetColumns {
  std::size_t id, timestamp, text, retweets, stance, vividness, frames, min_lon, min_lat, max_lon, max_lat;
  std::optional<std::size_t> county_fips, overlap, score, sentiment_class;

  explicit TweetColumns(const csv::Header& h)
      : id(h.index("id")),
        timestamp(h.index("timestamp")),
        text(h.index("text")),
        retweets(h.index("retweet_count")),
        stance(h.index("stance")),
        vividness(h.index("vividness")),
        frames(h.index("frames")),
        min_lon(h.index("min_lon")),
        min_lat(h.index("min_lat")),
        max_lon(h.index("max_lon")),
        max_lat(h.index("max_lat")),
        county_fips(h.find("county_fips")),
        overlap(h.find("overlap_fraction")),
        score(h.find("sentiment_score")),
        sentiment_class(h.find("sentiment_class")) {}
};

// Fills `t` from one CSV row. Returns kDropped for rows that carry no
// stance or no frame; sets `error` and returns kRejected for malformed rows.
RowOutcome parse_tweet_row(const std::vector<std::string>& f, const TweetColumns& c, const TweetFormat& format,
                           Tweet& t, std::string& error) {
  t.id = trim(f[c.id]);
  if (t.id.empty()) {
    error = "empty id";
    return RowOutcome::kRejected;
  }
  try {
    t.timestamp = parse_timestamp(trim(f[c.timestamp]));
  } catch (const InputError& e) {
    error = e.what();
    return RowOutcome::kRejected;
  }
  t.text = f[c.text];

  auto rt = parse_int(f[c.retweets]);
  if (!rt || *rt < 0) {
    error = "invalid retweet_count '" + f[c.retweets] + "'";
    return RowOutcome::kRejected;
  }
  t.retweet_count = *rt;

  auto vivid = parse_flag(f[c.vividness]);
  if (!vivid) {
    error = "invalid vividness '" + f[c.vividness] + "'";
    return RowOutcome::kRejected;
  }
  t.vivid = *vivid;

  std::string_view rest = f[c.frames];
  while (!rest.empty()) {
    const std::size_t semi = rest.find(';');
    const std::string token = trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (token.empty()) continue;
    auto frame = parse_frame(token);
    if (!frame) {
      error = "unknown frame '" + token + "'";
      return RowOutcome::kRejected;
    }
    t.frames.insert(*frame);
  }

  double coords[4];
  const std::size_t cols[4] = {c.min_lon, c.min_lat, c.max_lon, c.max_lat};
  for (int i = 0; i < 4; ++i) {
    auto v = parse_double(f[cols[i]]);
    if (!v) {
      error = "invalid coordinate '" + f[cols[i]] + "'";
      return RowOutcome::kRejected;
    }
    coords[i] = *v;
  }
  t.bbox = {coords[0], coords[1], coords[2], coords[3]};
  if (t.bbox.min_x > t.bbox.max_x || t.bbox.min_y > t.bbox.max_y) {
    error = "bounding box min exceeds max";
    return RowOutcome::kRejected;
  }

  if (c.county_fips && !trim(f[*c.county_fips]).empty()) {
    auto fips = normalize_fips(f[*c.county_fips]);
    if (!fips) {
      error = "invalid county_fips '" + f[*c.county_fips] + "'";
      return RowOutcome::kRejected;
    }
    t.county_fips = *fips;
  }
  if (c.overlap && !trim(f[*c.overlap]).empty()) {
    auto v = parse_double(f[*c.overlap]);
    if (!v || *v < 0.0 || *v > 1.0) {
      error = "invalid overlap_fraction '" + f[*c.overlap] + "'";
      return RowOutcome::kRejected;
    }
    t.overlap_fraction = *v;
  }
  if (c.score && !trim(f[*c.score]).empty()) {
    auto v = parse_double(f[*c.score]);
    if (!v || *v < -1.0 || *v > 1.0) {
      error = "invalid sentiment_score '" + f[*c.score] + "'";
      return RowOutcome::kRejected;
    }
    t.sentiment_score = *v;
  }
  if (c.sentiment_class && !trim(f[*c.sentiment_class]).empty()) {
    auto v = parse_sentiment_class(f[*c.sentiment_class]);
    if (!v) {
      error = "invalid sentiment_class '" + f[*c.sentiment_class] + "'";
      return RowOutcome::kRejected;
    }
    t.sentiment_class = *v;
  }

  std::optional<Stance> stance;
  if (format.hashtags) {
    switch (stance_from_hashtags(t.text, format.hashtags->support, format.hashtags->oppose)) {
      case HashtagStance::kFor: stance = Stance::kFor; break;
      case HashtagStance::kAgainst: stance = Stance::kAgainst; break;
      case HashtagStance::kUndetermined: break;
    }
  } else {
    const std::string s = trim(f[c.stance]);
    if (!s.empty()) {
      stance = parse_stance(s);
      if (!stance) {
        error = "unknown stance '" + s + "'";
        return RowOutcome::kRejected;
      }
    }
  }
  if (!stance || t.frames.empty()) return RowOutcome::kDropped;
  t.stance = *stance;
  return RowOutcome::kKept;
}

}  // namespace

TweetLoad load_tweets(std::istream& in, const TweetFormat& format, std::string_view source) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw InputError(std::string(source) + ": empty file");
  const csv::Header header(header_row->fields, source);
  const TweetColumns cols(header);

  TweetLoad out;
  std::set<std::string, std::less<>> seen;
  while (auto row = reader.next()) {
    if (row->fields.size() == 1 && trim(row->fields[0]).empty()) continue;  // blank line
    ++out.rows;
    if (row->fields.size() != header.size()) {
      ++out.rejected;
      out.diagnostics.push_back({row->line, "expected " + std::to_string(header.size()) + " fields, found " +
                                                std::to_string(row->fields.size())});
      continue;
    }
    Tweet t;
    std::string error;
    switch (parse_tweet_row(row->fields, cols, format, t, error)) {
      case RowOutcome::kRejected:
        ++out.rejected;
        out.diagnostics.push_back({row->line, error});
        break;
      case RowOutcome::kDropped:
        ++out.dropped;
        break;
      case RowOutcome::kKept:
        if (!seen.insert(t.id).second) {
          ++out.rejected;
          out.diagnostics.push_back({row->line, "duplicate id '" + t.id + "'"});
        } else {
          out.tweets.push_back(std::move(t));
        }
        break;
    }
  }
  return out;
}

TweetLoad load_tweets(const std::filesystem::path& path, const TweetFormat& format) {
  auto in = open_or_throw(path);
  return load_tweets(in, format, path.string());
}

HashtagStance stance_from_hashtags(std::string_view text, const std::set<std::string>& support_tags,
                                   const std::set<std::string>& oppose_tags) {
  auto word_char = [](unsigned char c) { return std::isalnum(c) != 0 || c == '_' || c >= 0x80; };
  std::size_t support = 0;
  std::size_t oppose = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < text.size() && word_char(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i + 1) {
      const std::string tag = to_lower(text.substr(i + 1, j - i - 1));
      if (support_tags.count(tag)) ++support;
      if (oppose_tags.count(tag)) ++oppose;
    }
    i = j - 1;
  }
  if (support > oppose) return HashtagStance::kFor;
  if (oppose > support) return HashtagStance::kAgainst;
  return HashtagStance::kUndetermined;
}

// ---------------------------------------------------------------------------

namespace {

Ring parse_ring(const json& coords, const std::string& fips) {
  if (!coords.is_array()) throw InputError("county " + fips + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const json& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw InputError("county " + fips + ": invalid position");
    }
    ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (ring.size() < 4 || ring.front() != ring.back()) {
    throw InputError("county " + fips + ": ring must have at least 4 positions and be closed");
  }
  return ring;
}

Polygon parse_polygon(const json& rings, const std::string& fips) {
  if (!rings.is_array() || rings.empty()) throw InputError("county " + fips + ": polygon without rings");
  Polygon poly;
  poly.outer = parse_ring(rings[0], fips);
  if (signed_ring_area(poly.outer) < 0) std::reverse(poly.outer.begin(), poly.outer.end());
  for (std::size_t i = 1; i < rings.size(); ++i) {
    Ring hole = parse_ring(rings[i], fips);
    if (signed_ring_area(hole) > 0) std::reverse(hole.begin(), hole.end());
    poly.holes.push_back(std::move(hole));
  }
  return poly;
}

std::string fips_property(const json& props) {
  const auto it = props.find("GEOID");
  if (it == props.end()) throw InputError("feature without GEOID");
  std::optional<std::string> fips;
  if (it->is_string()) fips = normalize_fips(it->get<std::string>());
  if (it->is_number_integer()) fips = normalize_fips(std::to_string(it->get<long long>()));
  if (!fips) throw InputError("invalid GEOID " + it->dump());
  return *fips;
}

}  // namespace

std::vector<CountyGeometry> load_counties(std::istream& in, std::string_view source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") || !doc["features"].is_array()) {
    throw InputError(std::string(source) + ": expected a FeatureCollection");
  }
  std::vector<CountyGeometry> out;
  std::set<std::string> seen;
  for (const json& feature : doc["features"]) {
    const json& props = feature.at("properties");
    CountyGeometry c;
    c.fips = fips_property(props);
    if (!seen.insert(c.fips).second) throw InputError(std::string(source) + ": duplicate GEOID " + c.fips);
    if (auto it = props.find("NAME"); it != props.end() && it->is_string()) c.name = it->get<std::string>();
    const json& geom = feature.at("geometry");
    const std::string type = geom.value("type", "");
    if (type == "Polygon") {
      c.polygons.push_back(parse_polygon(geom.at("coordinates"), c.fips));
    } else if (type == "MultiPolygon") {
      for (const json& p : geom.at("coordinates")) c.polygons.push_back(parse_polygon(p, c.fips));
    } else {
      throw InputError("county " + c.fips + ": unsupported geometry type '" + type + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CountyGeometry> load_counties(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_counties(in, path.string());
}

std::map<std::string, Demographics> load_demographics(std::istream& in, std::string_view source) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw InputError(std::string(source) + ": empty file");
  const csv::Header h(header_row->fields, source);
  const std::size_t c_fips = h.index("fips"), c_pop = h.index("population"), c_dem = h.index("dem_votes"),
                    c_rep = h.index("rep_votes"), c_inc = h.index("median_income"), c_mask = h.index("mask_usage");

  std::map<std::string, Demographics> out;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && trim(f[0]).empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(row->line) + ": "; };
    if (f.size() != h.size()) throw InputError(where() + "wrong number of fields");
    auto fips = normalize_fips(f[c_fips]);
    if (!fips) throw InputError(where() + "invalid fips '" + f[c_fips] + "'");

    auto opt_count = [&](std::size_t col, const char* name, bool positive) -> std::optional<std::int64_t> {
      if (trim(f[col]).empty()) return std::nullopt;
      auto v = parse_int(f[col]);
      if (!v || *v < 0 || (positive && *v == 0)) throw InputError(where() + "invalid " + name + " '" + f[col] + "'");
      return *v;
    };
    auto opt_real = [&](std::size_t col, const char* name) -> std::optional<double> {
      if (trim(f[col]).empty()) return std::nullopt;
      auto v = parse_double(f[col]);
      if (!v) throw InputError(where() + "invalid " + name + " '" + f[col] + "'");
      return *v;
    };

    Demographics d;
    d.population = opt_count(c_pop, "population", true);
    d.dem_votes = opt_count(c_dem, "dem_votes", false);
    d.rep_votes = opt_count(c_rep, "rep_votes", false);
    d.median_income = opt_real(c_inc, "median_income");
    d.mask_usage = opt_real(c_mask, "mask_usage");
    if (d.mask_usage && (*d.mask_usage < 0.0 || *d.mask_usage > 1.0)) {
      throw InputError(where() + "mask_usage outside [0, 1]");
    }
    if (!out.emplace(*fips, d).second) throw InputError(where() + "duplicate fips " + *fips);
  }
  return out;
}

std::map<std::string, Demographics> load_demographics(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_demographics(in, path.string());
}

std::map<std::string, std::vector<CovidPoint>> load_covid(std::istream& in, std::string_view source) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw InputError(std::string(source) + ": empty file");
  const csv::Header h(header_row->fields, source);
  const std::size_t c_fips = h.index("fips"), c_date = h.index("date"), c_cases = h.index("cases"),
                    c_deaths = h.index("deaths");

  std::map<std::string, std::vector<CovidPoint>> out;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    if (f.size() == 1 && trim(f[0]).empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(row->line) + ": "; };
    if (f.size() != h.size()) throw InputError(where() + "wrong number of fields");
    auto fips = normalize_fips(f[c_fips]);
    if (!fips) throw InputError(where() + "invalid fips '" + f[c_fips] + "'");
    CovidPoint p;
    try {
      p.date = parse_date(trim(f[c_date]));
    } catch (const InputError& e) {
      throw InputError(where() + e.what());
    }
    auto cases = parse_int(f[c_cases]);
    auto deaths = parse_int(f[c_deaths]);
    if (!cases || *cases < 0 || !deaths || *deaths < 0) throw InputError(where() + "invalid case/death count");
    p.cases = *cases;
    p.deaths = *deaths;
    out[*fips].push_back(p);
  }
  for (auto& [fips, series] : out) {
    std::stable_sort(series.begin(), series.end(),
                     [](const CovidPoint& a, const CovidPoint& b) { return a.date < b.date; });
  }
  return out;
}

std::map<std::string, std::vector<CovidPoint>> load_covid(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_covid(in, path.string());
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::string topic, std::vector<Tweet> tweets, std::map<std::string, County> counties)
    : topic_(std::move(topic)), tweets_(std::move(tweets)), counties_(std::move(counties)) {
  for (std::size_t i = 0; i < tweets_.size(); ++i) {
    const Tweet& t = tweets_[i];
    if (!t.county_fips || !counties_.count(*t.county_fips)) {
      throw InputError("tweet " + t.id + " is not assigned to a known county");
    }
    if (!by_id_.emplace(t.id, i).second) throw InputError("duplicate tweet id " + t.id);
    by_county_[*t.county_fips].push_back(i);
    if (!time_range_) {
      time_range_ = TimeRange{t.timestamp, t.timestamp};
    } else {
      time_range_->min = std::min(time_range_->min, t.timestamp);
      time_range_->max = std::max(time_range_->max, t.timestamp);
    }
  }
}

const County* Dataset::county(std::string_view fips) const {
  auto it = counties_.find(std::string(fips));
  return it == counties_.end() ? nullptr : &it->second;
}

const Tweet* Dataset::tweet(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &tweets_[it->second];
}

const std::vector<std::size_t>& Dataset::tweets_in(std::string_view fips) const {
  static const std::vector<std::size_t> kNone;
  auto it = by_county_.find(fips);
  return it == by_county_.end() ? kNone : it->second;
}

BuildResult build_dataset(std::vector<Tweet> tweets, const std::vector<CountyGeometry>& counties,
                          const std::map<std::string, Demographics>& demographics,
                          const std::map<std::string, std::vector<CovidPoint>>& covid,
                          const std::vector<std::optional<Assignment>>& assignments, std::string topic) {
  if (assignments.size() != tweets.size()) {
    throw InputError("assignment count does not match tweet count");
  }
  BuildResult result;

  std::map<std::string, County> table;
  for (const CountyGeometry& g : counties) {
    County c;
    c.fips = g.fips;
    c.name = g.name;
    c.polygons = g.polygons;
    if (auto it = demographics.find(g.fips); it != demographics.end()) {
      c.demographics = it->second;
    } else {
      c.demographics_missing = true;
      result.diagnostics.push_back({0, "county " + g.fips + " has no demographics"});
    }
    if (auto it = covid.find(g.fips); it != covid.end()) {
      const auto& series = it->second;
      for (std::size_t i = 1; i < series.size(); ++i) {
        const std::string where = "covid series for " + g.fips + " on " + format_date(series[i].date) + ": ";
        if (series[i].date <= series[i - 1].date) throw InputError(where + "duplicate date");
        if (series[i].cases < series[i - 1].cases) throw InputError(where + "cumulative cases decrease");
        if (series[i].deaths < series[i - 1].deaths) throw InputError(where + "cumulative deaths decrease");
      }
      c.covid_series = series;
    }
    table.emplace(c.fips, std::move(c));
  }

  std::vector<Tweet> kept;
  kept.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    Tweet& t = tweets[i];
    const auto& a = assignments[i];
    if (!a) {
      ++result.excluded_unassigned;
      continue;
    }
    if (!table.count(a->fips)) {
      ++result.excluded_unknown_county;
      result.diagnostics.push_back({0, "tweet " + t.id + " assigned to unknown county " + a->fips});
      continue;
    }
    t.county_fips = a->fips;
    t.overlap_fraction = a->overlap_fraction;
    kept.push_back(std::move(t));
  }
  result.dataset = std::make_shared<const Dataset>(std::move(topic), std::move(kept), std::move(table));
  return result;
}

}  // namespace motiv
