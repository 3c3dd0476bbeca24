#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "motiv/frames.hpp"
#include "motiv/geo.hpp"
#include "motiv/time.hpp"

namespace motiv {

enum class Stance : std::uint8_t { kFor, kAgainst };
enum class HashtagStance : std::uint8_t { kFor, kAgainst, kUndetermined };
enum class SentimentClass : std::uint8_t { kPositive, kNeutral, kNegative };

std::string_view to_string(Stance s);
std::string_view to_string(SentimentClass c);
std::optional<Stance> parse_stance(std::string_view s);
std::optional<SentimentClass> parse_sentiment_class(std::string_view s);

struct Tweet {
  std::string id;
  Timestamp timestamp = 0;
  std::string text;
  std::int64_t retweet_count = 0;
  Stance stance = Stance::kFor;
  bool vivid = false;
  FrameSet frames;
  BBox bbox;  // lon/lat degrees; a point geotag has min == max

  // Derived during ingest.
  std::optional<std::string> county_fips;
  double overlap_fraction = 0.0;
  double sentiment_score = 0.0;
  SentimentClass sentiment_class = SentimentClass::kNeutral;

  bool operator==(const Tweet&) const = default;
};

struct CovidPoint {
  DayNumber date = 0;
  std::int64_t cases = 0;   // cumulative
  std::int64_t deaths = 0;  // cumulative

  bool operator==(const CovidPoint&) const = default;
};

struct Demographics {
  std::optional<std::int64_t> population;
  std::optional<std::int64_t> dem_votes;
  std::optional<std::int64_t> rep_votes;
  std::optional<double> median_income;
  std::optional<double> mask_usage;

  bool operator==(const Demographics&) const = default;
};

struct County {
  std::string fips;
  std::string name;
  std::vector<Polygon> polygons;
  Demographics demographics;
  bool demographics_missing = false;  // no row in the demographics table
  std::vector<CovidPoint> covid_series;

  bool operator==(const County&) const = default;
};

struct Diagnostic {
  std::size_t line = 0;  // 0 when not tied to a line
  std::string message;
};

// ---------------------------------------------------------------------------
// Tweets

/// Stance derived from hashtags instead of the `stance` column.
struct HashtagRule {
  std::set<std::string> support;
  std::set<std::string> oppose;
};

struct TweetFormat {
  std::optional<HashtagRule> hashtags;
};

struct TweetLoad {
  std::vector<Tweet> tweets;
  std::size_t rows = 0;      // data rows read
  std::size_t dropped = 0;   // no stance or no frame
  std::size_t rejected = 0;  // malformed
  std::vector<Diagnostic> diagnostics;
};

/// Parses the tweet CSV. Columns `county_fips`, `overlap_fraction`,
/// `sentiment_score` and `sentiment_class` are read when present.
TweetLoad load_tweets(std::istream& in, const TweetFormat& format = {}, std::string_view source = "tweets.csv");
TweetLoad load_tweets(const std::filesystem::path& path, const TweetFormat& format = {});

/// Counts case-insensitive `#tag` occurrences on each side.
HashtagStance stance_from_hashtags(std::string_view text, const std::set<std::string>& support_tags,
                                   const std::set<std::string>& oppose_tags);

// ---------------------------------------------------------------------------
// Counties

struct CountyGeometry {
  std::string fips;
  std::string name;
  std::vector<Polygon> polygons;
};

/// FeatureCollection with GEOID/NAME properties and Polygon or MultiPolygon
/// geometry. Outer rings are normalized to counter-clockwise, holes to
/// clockwise.
std::vector<CountyGeometry> load_counties(std::istream& in, std::string_view source = "counties.geojson");
std::vector<CountyGeometry> load_counties(const std::filesystem::path& path);

std::map<std::string, Demographics> load_demographics(std::istream& in, std::string_view source = "demographics.csv");
std::map<std::string, Demographics> load_demographics(const std::filesystem::path& path);

/// Rows grouped by FIPS and sorted by date. Ordering invariants are checked
/// by build_dataset.
std::map<std::string, std::vector<CovidPoint>> load_covid(std::istream& in, std::string_view source = "covid.csv");
std::map<std::string, std::vector<CovidPoint>> load_covid(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset

struct TimeRange {
  Timestamp min = 0;
  Timestamp max = 0;
};

/// Joined corpus and county table. Immutable once built; share it through
/// `std::shared_ptr<const Dataset>`.
class Dataset {
 public:
  /// Throws InputError when a tweet references an unknown county.
  Dataset(std::string topic, std::vector<Tweet> tweets, std::map<std::string, County> counties);

  const std::string& topic() const { return topic_; }
  const std::vector<Tweet>& tweets() const { return tweets_; }
  const std::map<std::string, County>& counties() const { return counties_; }
  /// Unset for an empty corpus.
  const std::optional<TimeRange>& time_range() const { return time_range_; }

  const County* county(std::string_view fips) const;
  const Tweet* tweet(std::string_view id) const;
  /// Indices into tweets() of tweets assigned to `fips`, in corpus order.
  const std::vector<std::size_t>& tweets_in(std::string_view fips) const;

 private:
  std::string topic_;
  std::vector<Tweet> tweets_;
  std::map<std::string, County> counties_;
  std::optional<TimeRange> time_range_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_county_;
};

struct BuildResult {
  std::shared_ptr<const Dataset> dataset;
  std::size_t excluded_unassigned = 0;
  std::size_t excluded_unknown_county = 0;
  std::vector<Diagnostic> diagnostics;
};

/// Joins tweets with counties. `assignments` is parallel to `tweets`;
/// tweets without an assignment, or assigned to a FIPS missing from the
/// county table, are excluded. Counties without a demographics row are kept
/// with `demographics_missing` set. Throws InputError on COVID series whose
/// dates repeat or whose cumulative counts decrease.
BuildResult build_dataset(std::vector<Tweet> tweets, const std::vector<CountyGeometry>& counties,
                          const std::map<std::string, Demographics>& demographics,
                          const std::map<std::string, std::vector<CovidPoint>>& covid,
                          const std::vector<std::optional<Assignment>>& assignments, std::string topic = "");

}  // namespace motiv
