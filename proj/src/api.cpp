#include "motiv/api.hpp"

#include <cmath>

#include "motiv/errors.hpp"
#include "motiv/gam.hpp"
#include "motiv/glyph.hpp"
#include "motiv/numeric.hpp"

namespace motiv::api {

namespace {

constexpr int kGeometryDigits = 9;

double geom(double v) { return round_significant(v, kGeometryDigits); }

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt_number(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

std::string lower(std::string_view s) { return to_lower(s); }

std::optional<MoralFrame> frame_param(std::optional<std::string_view> frame) {
  if (!frame || frame->empty()) return std::nullopt;
  if (auto f = parse_frame(*frame)) return f;
  json valid = json::array();
  for (const auto& fi : kFrames) valid.push_back(fi.name);
  throw ApiError(ErrorCode::kBadRequest, "unknown frame '" + std::string(*frame) + "'", {{"valid_frames", valid}});
}

json frames_json(const FrameSet& frames) {
  json out = json::array();
  frames.for_each([&](MoralFrame f) { out.push_back(name_of(f)); });
  return out;
}

json county_features(const analytics::FeatureTable& features, const County& c) {
  json values = json::object();
  for (const auto& name : analytics::FeatureTable::county_feature_names()) {
    values[name] = opt_number(features.county_value(c, name));
  }
  return values;
}

json county_tooltip(const analytics::FeatureTable& features, const County& c) {
  const auto& agg = features.aggregate(c.fips);
  return {{"fips", c.fips},
          {"name", c.name},
          {"population", opt_number(c.demographics.population)},
          {"leaning", opt_number(analytics::political_leaning(c))},
          {"tweets_total", agg.total_tweets},
          {"tweets_for", agg.for_total},
          {"tweets_against", agg.against_total},
          {"demographics_missing", c.demographics_missing}};
}

json summary_json(const analytics::FrameSummary& s) {
  const FrameInfo& fi = info(s.frame);
  return {{"frame", fi.name},
          {"polarity", fi.polarity == Polarity::kVirtue ? "virtue" : "vice"},
          {"pair_id", fi.pair_id},
          {"n_tweets", s.n_tweets},
          {"n_for", s.n_for},
          {"n_against", s.n_against},
          {"retweets_for", s.retweets_for},
          {"retweets_against", s.retweets_against},
          {"vivid_fraction", s.vivid_fraction},
          {"sentiment",
           {{"positive", s.sentiment.positive}, {"neutral", s.sentiment.neutral}, {"negative", s.sentiment.negative}}},
          {"party_fraction_dem", s.party_fraction_dem},
          {"n_party_known", s.n_party_known}};
}

json tile_json(const analytics::Tile& t) {
  return {{"tweet_id", t.tweet_id},
          {"county_fips", t.county_fips},
          {"retweet_count", t.retweet_count},
          {"y_offset", geom(t.y_offset)},
          {"height", geom(t.height)},
          {"color_value", opt_number(t.color_value)},
          {"detail_ref", "/api/tweets/" + t.tweet_id}};
}

json point_json(const Point& p) { return json::array({geom(p.x), geom(p.y)}); }

gam::ModelSpec parse_spec(const json& j) {
  if (!j.is_object()) throw ApiError(ErrorCode::kBadRequest, "model spec must be a JSON object");
  gam::ModelSpec spec;
  try {
    spec.target = j.at("target").get<std::string>();
    const json& terms = j.at("terms");
    if (!terms.is_array()) throw ApiError(ErrorCode::kBadRequest, "'terms' must be an array");
    for (const json& t : terms) {
      gam::TermSpec ts;
      if (t.is_string()) {
        ts.feature = t.get<std::string>();
      } else {
        ts.feature = t.at("feature").get<std::string>();
        const std::string kind = t.value("kind", std::string("linear"));
        const auto k = gam::parse_term_kind(kind);
        if (!k) throw ApiError(ErrorCode::kBadRequest, "unknown term kind '" + kind + "' (linear, spline)");
        ts.kind = *k;
      }
      spec.terms.push_back(std::move(ts));
    }
    if (j.contains("granularity")) {
      const std::string g = j.at("granularity").get<std::string>();
      const auto parsed = gam::parse_granularity(g);
      if (!parsed) throw ApiError(ErrorCode::kBadRequest, "unknown granularity '" + g + "' (per_county, per_tweet)");
      spec.granularity = *parsed;
    }
    if (j.contains("basis_size")) spec.spline_basis_size = j.at("basis_size").get<int>();
    if (j.contains("penalty_order")) spec.penalty_order = j.at("penalty_order").get<int>();
    if (j.contains("lambda_grid")) spec.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ApiError(ErrorCode::kBadRequest, std::string("invalid model spec: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const ModelError& e) {
    throw ApiError(ErrorCode::kBadRequest, e.what());
  }
  const bool per_tweet = spec.granularity == gam::Granularity::kPerTweet;
  auto known = [&](const std::string& name) {
    return analytics::FeatureTable::is_county_feature(name) ||
           (per_tweet && analytics::FeatureTable::is_tweet_feature(name));
  };
  std::vector<std::string> names{spec.target};
  for (const auto& t : spec.terms) names.push_back(t.feature);
  for (const auto& n : names) {
    if (!known(n)) {
      throw ApiError(ErrorCode::kBadRequest,
                     "unknown feature '" + n + "' for " + std::string(gam::to_string(spec.granularity)) + " models");
    }
  }
  return spec;
}

json spec_json(const gam::ModelSpec& spec) {
  json terms = json::array();
  for (const auto& t : spec.terms) terms.push_back({{"feature", t.feature}, {"kind", gam::to_string(t.kind)}});
  return {{"target", spec.target},
          {"terms", terms},
          {"granularity", gam::to_string(spec.granularity)},
          {"basis_size", spec.spline_basis_size},
          {"penalty_order", spec.penalty_order},
          {"lambda_grid", spec.lambda_grid}};
}

}  // namespace

std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::kBadRequest: return "bad_request";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDegenerateModel: return "degenerate_model";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::kBadRequest: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDegenerateModel: return 422;
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

json ApiError::to_json() const {
  json e = {{"code", to_string(code_)}, {"message", what()}};
  if (!detail_.is_null()) e["detail"] = detail_;
  return {{"error", e}};
}

json finite(json value) {
  if (value.is_number_float() && !std::isfinite(value.get<double>())) return nullptr;
  if (value.is_structured()) {
    for (auto& v : value) v = finite(std::move(v));
  }
  return value;
}

std::string to_body(const json& payload) { return finite(payload).dump(); }

Service::Service(std::shared_ptr<const Dataset> dataset) : dataset_(std::move(dataset)), features_(*dataset_) {}

json Service::frames() const {
  json out = json::array();
  for (const auto& fi : kFrames) {
    out.push_back(
        {{"name", fi.name}, {"polarity", fi.polarity == Polarity::kVirtue ? "virtue" : "vice"}, {"pair_id", fi.pair_id}});
  }
  return out;
}

json Service::summary(std::optional<std::string_view> sort, std::optional<std::string_view> dir) const {
  analytics::SortKey key = analytics::SortKey::kCanonical;
  if (sort && !sort->empty()) {
    const auto k = analytics::parse_sort_key(*sort);
    if (!k) {
      json valid = json::array();
      for (auto n : analytics::sort_key_names()) valid.push_back(n);
      throw ApiError(ErrorCode::kBadRequest, "unknown sort key '" + std::string(*sort) + "'", {{"valid_keys", valid}});
    }
    key = *k;
  }
  // A sort key without a direction ranks largest first.
  analytics::SortDirection direction =
      key == analytics::SortKey::kCanonical ? analytics::SortDirection::kAsc : analytics::SortDirection::kDesc;
  if (dir && !dir->empty()) {
    const std::string d = lower(*dir);
    if (d == "asc") {
      direction = analytics::SortDirection::kAsc;
    } else if (d == "desc") {
      direction = analytics::SortDirection::kDesc;
    } else {
      throw ApiError(ErrorCode::kBadRequest, "unknown sort direction '" + std::string(*dir) + "'",
                     {{"valid_directions", {"asc", "desc"}}});
    }
  }
  const auto summaries = analytics::frame_summaries(*dataset_);
  json items = json::array();
  for (MoralFrame f : analytics::sort_frames(summaries, key, direction)) {
    json s = summary_json(summaries[index_of(f)]);
    s["sort_value"] = analytics::sort_value(summaries[index_of(f)], key);
    items.push_back(std::move(s));
  }
  return {{"sort", analytics::to_string(key)},
          {"dir", direction == analytics::SortDirection::kAsc ? "asc" : "desc"},
          {"frames", items}};
}

json Service::timeline(std::optional<std::string_view> frame, std::optional<std::string_view> color) const {
  const auto f = frame_param(frame);
  const std::string_view c = color && !color->empty() ? *color : kDefaultTimelineColor;
  analytics::TimelineLayout layout;
  try {
    layout = analytics::layout_timeline(features_, f, c);
  } catch (const InputError& e) {
    throw ApiError(ErrorCode::kBadRequest, e.what());
  }
  json bins = json::array();
  for (const auto& b : layout.bins) {
    json above = json::array();
    json below = json::array();
    for (const auto& t : b.above) above.push_back(tile_json(t));
    for (const auto& t : b.below) below.push_back(tile_json(t));
    bins.push_back({{"start", format_timestamp(b.start)},
                    {"end", format_timestamp(b.end)},
                    {"above", above},
                    {"below", below},
                    {"strip_sentiment_mean", opt_number(b.strip_sentiment_mean)}});
  }
  return {{"frame", f ? json(name_of(*f)) : json(nullptr)},
          {"color", layout.color_feature},
          {"bin_width_days", layout.bin_width_days},
          {"tile_count", layout.tile_count()},
          {"bins", bins}};
}

json Service::map(std::optional<std::string_view> frame, std::optional<std::string_view> color) const {
  const auto f = frame_param(frame);
  const std::string c(color && !color->empty() ? *color : kDefaultMapColor);
  glyph::LayoutResult layout;
  try {
    layout = glyph::layout_map(features_, f, c);
  } catch (const InputError& e) {
    throw ApiError(ErrorCode::kBadRequest, e.what());
  }
  json glyphs = json::array();
  for (const auto& g : layout.glyphs) {
    glyphs.push_back({{"fips", g.fips},
                      {"anchor", point_json(g.anchor)},
                      {"position", point_json(g.position)},
                      {"half_width", geom(g.half_width)},
                      {"upper_radius", geom(g.upper_radius)},
                      {"lower_radius", geom(g.lower_radius)},
                      {"color_value", opt_number(g.color_value)},
                      {"anchor_fallback", g.anchor_fallback},
                      {"county", county_tooltip(features_, *dataset_->county(g.fips))}});
  }
  return {{"frame", f ? json(name_of(*f)) : json(nullptr)},
          {"color", c},
          {"iterations", layout.iterations},
          {"converged", layout.converged},
          {"max_penetration", geom(layout.max_penetration)},
          {"glyphs", glyphs}};
}

json Service::gam(std::string_view body) const {
  json spec;
  try {
    spec = json::parse(body);
  } catch (const json::exception& e) {
    throw ApiError(ErrorCode::kBadRequest, std::string("malformed JSON: ") + e.what());
  }
  return gam(spec);
}

json Service::gam(const json& request) const {
  const gam::ModelSpec spec = parse_spec(request);
  bool want_pvalues = false;
  if (request.contains("pvalues")) {
    if (!request.at("pvalues").is_boolean()) throw ApiError(ErrorCode::kBadRequest, "'pvalues' must be a boolean");
    want_pvalues = request.at("pvalues").get<bool>();
  }
  try {
    const gam::DesignTable table = gam::design_row_table(features_, spec);
    const gam::GamModel model = gam::fit(table, spec);
    json terms = json::array();
    for (const auto& t : model.terms) {
      const gam::PartialDependence pd = gam::partial_dependence(model, t.spec.feature);
      json term = {{"feature", t.spec.feature},
                   {"kind", gam::to_string(t.spec.kind)},
                   {"x_min", t.x_min},
                   {"x_max", t.x_max},
                   {"partial_dependence",
                    {{"grid", pd.grid},
                     {"values", pd.values},
                     {"se_band", pd.se_band ? json(*pd.se_band) : json(nullptr)}}}};
      if (t.spec.kind == gam::TermKind::kLinear) term["coefficient"] = t.slope();
      terms.push_back(std::move(term));
    }
    json out = {{"spec", spec_json(spec)},
                {"n_rows", model.n_rows},
                {"dropped_rows", table.dropped},
                {"lambda", model.lambda},
                {"edf", model.edf},
                {"rss", model.rss},
                {"gcv", model.gcv_score},
                {"intercept", model.intercept_at_origin()},
                {"jittered", model.jittered},
                {"terms", terms}};
    if (want_pvalues) {
      if (model.all_linear()) {
        json tests = json::array();
        for (const auto& tt : gam::linear_pvalues(model)) {
          tests.push_back({{"feature", tt.feature},
                           {"coefficient", tt.coefficient},
                           {"std_error", tt.std_error},
                           {"t", tt.t},
                           {"p_value", tt.p_value}});
        }
        out["pvalues"] = tests;
      } else {
        out["pvalues"] = nullptr;
        out["pvalues_note"] =
            "p-values are reported for all-linear models only; spline terms are penalized and their "
            "significance tests are approximate";
      }
    }
    return out;
  } catch (const ModelError& e) {
    throw ApiError(ErrorCode::kDegenerateModel, e.what());
  } catch (const InputError& e) {
    throw ApiError(ErrorCode::kBadRequest, e.what());
  }
}

json Service::brush_county(std::string_view fips) const {
  const County* c = dataset_->county(fips);
  if (c == nullptr) throw ApiError(ErrorCode::kNotFound, "unknown county '" + std::string(fips) + "'");
  json ids = json::array();
  for (std::size_t i : dataset_->tweets_in(fips)) ids.push_back(dataset_->tweets()[i].id);
  return {{"fips", c->fips},
          {"name", c->name},
          {"tweet_ids", ids},
          {"demographics_missing", c->demographics_missing},
          {"features", county_features(features_, *c)}};
}

json Service::tweet(std::string_view id) const {
  const Tweet* t = dataset_->tweet(id);
  if (t == nullptr) throw ApiError(ErrorCode::kNotFound, "unknown tweet '" + std::string(id) + "'");
  const County* c = t->county_fips ? dataset_->county(*t->county_fips) : nullptr;
  return {{"id", t->id},
          {"timestamp", format_timestamp(t->timestamp)},
          {"text", t->text},
          {"retweet_count", t->retweet_count},
          {"stance", to_string(t->stance)},
          {"vivid", t->vivid},
          {"frames", frames_json(t->frames)},
          {"bbox", {t->bbox.min_x, t->bbox.min_y, t->bbox.max_x, t->bbox.max_y}},
          {"county_fips", t->county_fips ? json(*t->county_fips) : json(nullptr)},
          {"county_name", c ? json(c->name) : json(nullptr)},
          {"overlap_fraction", t->overlap_fraction},
          {"sentiment_score", t->sentiment_score},
          {"sentiment_class", to_string(t->sentiment_class)}};
}

json Service::dataset_info() const {
  const auto& range = dataset_->time_range();
  return {{"topic", dataset_->topic()},
          {"tweets", dataset_->tweets().size()},
          {"counties", dataset_->counties().size()},
          {"time_range",
           range ? json{{"min", format_timestamp(range->min)}, {"max", format_timestamp(range->max)}} : json(nullptr)},
          {"county_features", analytics::FeatureTable::county_feature_names()},
          {"tweet_features", analytics::FeatureTable::tweet_feature_names()},
          {"sort_keys", analytics::sort_key_names()}};
}

Response Service::handle(std::string_view method, std::string_view path, const Query& query,
                         std::string_view body) const {
  auto param = [&](std::string_view name) -> std::optional<std::string_view> {
    auto it = query.find(name);
    if (it == query.end()) return std::nullopt;
    return it->second;
  };
  auto suffix = [&](std::string_view prefix) -> std::optional<std::string_view> {
    if (path.size() <= prefix.size() || path.substr(0, prefix.size()) != prefix) return std::nullopt;
    return path.substr(prefix.size());
  };
  try {
    json payload;
    const bool get = method == "GET";
    if (get && path == "/api/health") {
      payload = {{"status", "ok"}};
    } else if (get && path == "/api/dataset") {
      payload = dataset_info();
    } else if (get && path == "/api/frames") {
      payload = frames();
    } else if (get && path == "/api/summary") {
      payload = summary(param("sort"), param("dir"));
    } else if (get && path == "/api/timeline") {
      payload = timeline(param("frame"), param("color"));
    } else if (get && path == "/api/map") {
      payload = map(param("frame"), param("color"));
    } else if (method == "POST" && path == "/api/gam") {
      payload = gam(body);
    } else if (auto fips = suffix("/api/brush/county/"); get && fips) {
      payload = brush_county(*fips);
    } else if (auto id = suffix("/api/tweets/"); get && id) {
      payload = tweet(*id);
    } else {
      throw ApiError(ErrorCode::kNotFound, "no route for " + std::string(method) + " " + std::string(path));
    }
    return {200, to_body(payload)};
  } catch (const ApiError& e) {
    return {http_status(e.code()), to_body(e.to_json())};
  } catch (const std::exception& e) {
    const ApiError err(ErrorCode::kInternal, e.what());
    return {500, to_body(err.to_json())};
  }
}

}  // namespace motiv::api
