#include <future>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "motiv/api.hpp"
#include "motiv/archive.hpp"
#include "motiv/server.hpp"
#include "support.hpp"

using namespace motiv;
using motiv::api::json;

namespace {

const api::Service& service() {
  static const api::Service s(test_support::ingest_fixture().dataset);
  return s;
}

api::Response get(const std::string& path, const api::Query& q = {}) { return service().handle("GET", path, q, ""); }

json body(const api::Response& r) { return json::parse(r.body); }

bool all_finite(const json& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured()) {
    for (const auto& v : j) {
      if (!all_finite(v)) return false;
    }
  }
  return true;
}

void check_error(const api::Response& r, int status, const std::string& code) {
  CHECK(r.status == status);
  const json j = body(r);
  REQUIRE(j.contains("error"));
  CHECK(j.size() == 1);
  CHECK(j["error"]["code"] == code);
  CHECK(j["error"]["message"].is_string());
}

}  // namespace

TEST_CASE("frames endpoint") {
  const json f = body(get("/api/frames"));
  REQUIRE(f.size() == 12);
  CHECK(f[0]["name"] == "Care");
  CHECK(f[1]["name"] == "Harm");
  CHECK(f[0]["pair_id"] == f[1]["pair_id"]);
  std::map<int, int> pairs;
  for (const auto& d : f) ++pairs[d["pair_id"].get<int>()];
  for (const auto& [id, n] : pairs) CHECK(n == 2);
}

TEST_CASE("summary endpoint") {
  const json def = body(get("/api/summary"));
  CHECK(def["sort"] == "canonical");
  CHECK(def["dir"] == "asc");
  for (std::size_t i = 0; i < kFrameCount; ++i) CHECK(def["frames"][i]["frame"] == kFrames[i].name);

  const json pop = body(get("/api/summary", {{"sort", "popularity"}, {"dir", "desc"}}));
  CHECK(pop["sort"] == "popularity");
  CHECK(pop["frames"][0]["frame"] == "Care");

  const auto bad = get("/api/summary", {{"sort", "bogus"}});
  check_error(bad, 400, "bad_request");
  const json detail = body(bad)["error"]["detail"]["valid_keys"];
  CHECK(detail.size() == analytics::sort_key_names().size());
  check_error(get("/api/summary", {{"sort", "party"}, {"dir", "sideways"}}), 400, "bad_request");
}

TEST_CASE("timeline endpoint") {
  const json all = body(get("/api/timeline"));
  const analytics::TimelineLayout direct =
      analytics::layout_timeline(service().features(), std::nullopt, api::kDefaultTimelineColor);
  CHECK(all["tile_count"] == direct.tile_count());
  CHECK(all["tile_count"] == service().dataset().tweets().size());

  const json care = body(get("/api/timeline", {{"frame", "Care"}}));
  std::size_t tiles = 0;
  for (const auto& b : care["bins"]) {
    for (const char* side : {"above", "below"}) {
      for (const auto& t : b[side]) {
        ++tiles;
        const Tweet* tw = service().dataset().tweet(t["tweet_id"].get<std::string>());
        REQUIRE(tw != nullptr);
        CHECK(tw->frames.contains(MoralFrame::kCare));
        CHECK(get(t["detail_ref"].get<std::string>()).status == 200);
      }
    }
  }
  CHECK(tiles == 3);
  CHECK(care["tile_count"] == tiles);

  check_error(get("/api/timeline", {{"frame", "Kindness"}}), 400, "bad_request");
  check_error(get("/api/timeline", {{"color", "nope"}}), 400, "bad_request");
}

TEST_CASE("map endpoint") {
  const auto first = get("/api/map", {{"color", "leaning"}});
  const auto second = get("/api/map", {{"color", "leaning"}});
  CHECK(first.status == 200);
  CHECK(first.body == second.body);
  const json m = body(first);
  std::size_t expected = 0;
  for (const auto& [fips, c] : service().dataset().counties()) {
    const bool populated = c.demographics.population && *c.demographics.population > 0;
    if (populated || !service().dataset().tweets_in(fips).empty()) ++expected;
  }
  CHECK(m["glyphs"].size() == expected);
  for (const auto& g : m["glyphs"]) {
    const County& c = *service().dataset().county(g["fips"].get<std::string>());
    const auto leaning = analytics::political_leaning(c);
    if (leaning) {
      CHECK(g["color_value"].get<double>() == static_cast<double>(*leaning));
    } else {
      CHECK(g["color_value"].is_null());
    }
    CHECK(g["county"]["fips"] == g["fips"]);
  }
  check_error(get("/api/map", {{"color", "sentiment"}}), 400, "bad_request");
}

TEST_CASE("gam endpoint") {
  // tweets_total = tweets_for + tweets_against in every county.
  const json spec = {{"target", "tweets_total"},
                     {"terms", {{{"feature", "tweets_for"}, {"kind", "linear"}}, {{"feature", "tweets_against"}}}},
                     {"granularity", "per_county"},
                     {"pvalues", true}};
  const auto r = service().handle("POST", "/api/gam", {}, spec.dump());
  REQUIRE(r.status == 200);
  const json j = body(r);
  CHECK(std::abs(j["terms"][0]["coefficient"].get<double>() - 1.0) < 1e-6);
  CHECK(std::abs(j["terms"][1]["coefficient"].get<double>() - 1.0) < 1e-6);
  CHECK(j["pvalues"].is_array());
  CHECK(j["terms"][0]["partial_dependence"]["grid"].size() == 50);

  json spline = spec;
  spline["terms"] = {{{"feature", "sentiment"}, {"kind", "spline"}}};
  spline["basis_size"] = 4;
  spline["penalty_order"] = 1;
  spline["target"] = "retweet_count";
  spline["granularity"] = "per_tweet";
  const auto rs = service().handle("POST", "/api/gam", {}, spline.dump());
  REQUIRE(rs.status == 200);
  const json js = body(rs);
  CHECK(js["pvalues"].is_null());
  CHECK(js["pvalues_note"].is_string());

  check_error(service().handle("POST", "/api/gam", {}, "{not json"), 400, "bad_request");
  check_error(service().handle("POST", "/api/gam", {}, R"({"target":"tweets_total","terms":["nope"]})"), 400,
              "bad_request");
  check_error(service().handle("POST", "/api/gam", {}, R"({"target":"purity_for","terms":["population"]})"), 422,
              "degenerate_model");
  const auto degenerate = service().handle("POST", "/api/gam", {}, R"({"target":"purity_for","terms":["population"]})");
  CHECK(body(degenerate)["error"]["message"] == "degenerate target");
}

TEST_CASE("gam endpoint recovers an exact slope") {
  std::vector<Tweet> tweets;
  for (int i = 0; i < 10; ++i) {
    Tweet t;
    t.id = "x" + std::to_string(i);
    t.timestamp = 1585735200 + i * 3600;
    t.retweet_count = 2 * i + 1;
    t.vivid = i % 2 == 0;
    t.stance = i % 3 == 0 ? Stance::kFor : Stance::kAgainst;
    t.frames.insert(MoralFrame::kCare);
    t.sentiment_score = static_cast<double>(i);
    tweets.push_back(t);
  }
  const api::Service s(test_support::single_county_dataset(tweets));
  const json spec = {{"target", "retweet_count"},
                     {"terms", {{{"feature", "sentiment"}, {"kind", "linear"}}}},
                     {"granularity", "per_tweet"}};
  const auto r = s.handle("POST", "/api/gam", {}, spec.dump());
  REQUIRE(r.status == 200);
  const json j = body(r);
  CHECK(std::abs(j["terms"][0]["coefficient"].get<double>() - 2.0) < 1e-6);
  CHECK(std::abs(j["intercept"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("brushing and tweet detail") {
  const json b = body(get("/api/brush/county/01003"));
  CHECK(b["tweet_ids"].size() == 2);
  CHECK(b["features"]["population"] == 40000.0);
  check_error(get("/api/brush/county/99999"), 404, "not_found");

  for (const auto& [fips, c] : service().dataset().counties()) {
    const json ids = body(get("/api/brush/county/" + fips))["tweet_ids"];
    for (const auto& id : ids) {
      const auto t = get("/api/tweets/" + id.get<std::string>());
      REQUIRE(t.status == 200);
      CHECK(body(t)["county_fips"] == fips);
    }
  }
  check_error(get("/api/tweets/nope"), 404, "not_found");
  check_error(get("/api/unknown"), 404, "not_found");
}

TEST_CASE("all numbers are finite and the dataset is unchanged") {
  const std::string before = archive::serialize(service().dataset());
  for (const auto& path : {"/api/frames", "/api/summary", "/api/timeline", "/api/map", "/api/dataset"}) {
    const auto r = get(path);
    CHECK(r.status == 200);
    CHECK(all_finite(body(r)));
  }
  service().handle("POST", "/api/gam", {}, R"({"target":"tweets_total","terms":["population"]})");
  CHECK(archive::serialize(service().dataset()) == before);
  CHECK(api::finite(json(std::nan(""))).is_null());
}

TEST_CASE("http server: routes, CORS and concurrent requests") {
  server::Server srv(service(), {"127.0.0.1", 0, "http://ui.example"});
  const int port = srv.bind();
  std::thread loop([&] { srv.listen(); });
  srv.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto frames = cli.Get("/api/frames");
  REQUIRE(frames);
  CHECK(frames->status == 200);
  CHECK(frames->get_header_value("Access-Control-Allow-Origin") == "http://ui.example");
  CHECK(frames->body == get("/api/frames").body);

  auto missing = cli.Get("/api/brush/county/99999");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto post = cli.Post("/api/gam", "{bad", "application/json");
  REQUIRE(post);
  CHECK(post->status == 400);

  auto options = cli.Options("/api/gam");
  REQUIRE(options);
  CHECK(options->status == 204);

  const std::vector<std::string> paths = {"/api/summary?sort=popularity&dir=desc", "/api/timeline?frame=Care",
                                          "/api/map?color=leaning", "/api/brush/county/01001", "/api/frames"};
  std::vector<std::string> serial;
  for (const auto& p : paths) {
    auto r = cli.Get(p);
    REQUIRE(r);
    serial.push_back(r->body);
  }
  std::vector<std::future<std::pair<std::size_t, std::string>>> storm;
  for (std::size_t i = 0; i < 40; ++i) {
    storm.push_back(std::async(std::launch::async, [&, i] {
      httplib::Client c("127.0.0.1", port);
      auto r = c.Get(paths[i % paths.size()]);
      return std::pair<std::size_t, std::string>{i % paths.size(), r ? r->body : std::string()};
    }));
  }
  for (auto& f : storm) {
    const auto [k, b] = f.get();
    CHECK(b == serial[k]);
  }

  srv.stop();
  loop.join();
}
