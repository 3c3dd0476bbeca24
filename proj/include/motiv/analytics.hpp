#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motiv/corpus.hpp"

namespace motiv::analytics {

/// dem_votes - rep_votes; absent when either count is missing.
std::optional<std::int64_t> political_leaning(const County& county);

// ---------------------------------------------------------------------------
// Frame summaries

struct SentimentCounts {
  std::size_t positive = 0;
  std::size_t neutral = 0;
  std::size_t negative = 0;
};

struct FrameSummary {
  MoralFrame frame = MoralFrame::kCare;
  std::size_t n_tweets = 0;
  std::size_t n_for = 0;
  std::size_t n_against = 0;
  std::int64_t retweets_for = 0;
  std::int64_t retweets_against = 0;
  double vivid_fraction = 0.0;
  SentimentCounts sentiment;
  // Share of tweets from counties with leaning > 0, among tweets whose
  // county leaning is known.
  double party_fraction_dem = 0.0;
  std::size_t n_party_known = 0;
};

FrameSummary frame_summary(const Dataset& dataset, MoralFrame frame);
/// One summary per frame, canonical order.
std::vector<FrameSummary> frame_summaries(const Dataset& dataset);

enum class SortKey { kCanonical, kStanceShare, kPopularity, kVividness, kSentiment, kParty };
enum class SortDirection { kAsc, kDesc };

std::optional<SortKey> parse_sort_key(std::string_view s);
std::string_view to_string(SortKey k);
/// Names accepted by parse_sort_key.
std::vector<std::string_view> sort_key_names();

/// Statistic a sort key orders by:
///   stance_share  n_for / n_tweets
///   popularity    retweets_for + retweets_against + n_tweets
///   vividness     vivid_fraction
///   sentiment     (positive - negative) / n_tweets
///   party         party_fraction_dem
double sort_value(const FrameSummary& s, SortKey key);

/// Stable sort; equal statistics keep their input order.
std::vector<MoralFrame> sort_frames(std::span<const FrameSummary> summaries, SortKey key, SortDirection dir);

// ---------------------------------------------------------------------------
// County aggregates and features

struct CountyAggregate {
  std::string fips;
  // counts[frame][0] = for, counts[frame][1] = against
  std::array<std::array<std::size_t, 2>, kFrameCount> counts{};
  std::size_t for_total = 0;
  std::size_t against_total = 0;
  std::size_t total_tweets = 0;
  std::optional<std::int64_t> leaning;

  std::size_t count(std::optional<MoralFrame> frame, Stance stance) const;
};

std::map<std::string, CountyAggregate> county_aggregates(const Dataset& dataset);

/// Peak cumulative value per capita within the dataset's time range (the
/// whole series when the range is undefined).
std::optional<double> covid_cases_per_capita(const County& county, const std::optional<TimeRange>& range);
std::optional<double> covid_deaths_per_capita(const County& county, const std::optional<TimeRange>& range);

/// Named numeric features of counties and tweets, shared by the timeline
/// coloring, the map coloring, and the model design tables.
///
/// County features: population, dem_votes, rep_votes, leaning,
/// median_income, mask_usage, covid_cases_per_capita,
/// covid_deaths_per_capita, tweets_total, tweets_for, tweets_against and
/// `<frame>_for` / `<frame>_against` for each lowercase frame name.
///
/// Tweet features: retweet_count, sentiment, vividness, stance (1 = for),
/// and one 0/1 indicator per lowercase frame name. A tweet also carries
/// every feature of its county.
class FeatureTable {
 public:
  explicit FeatureTable(const Dataset& dataset);

  static const std::vector<std::string>& county_feature_names();
  static const std::vector<std::string>& tweet_feature_names();
  static bool is_county_feature(std::string_view name);
  static bool is_tweet_feature(std::string_view name);

  const Dataset& dataset() const { return dataset_; }
  const CountyAggregate& aggregate(const std::string& fips) const;
  const std::map<std::string, CountyAggregate>& aggregates() const { return aggregates_; }

  std::optional<double> county_value(const County& county, std::string_view name) const;
  /// Tweet-level names, falling back to the tweet's county.
  std::optional<double> tweet_value(const Tweet& tweet, std::string_view name) const;

 private:
  const Dataset& dataset_;
  std::map<std::string, CountyAggregate> aggregates_;
};

// ---------------------------------------------------------------------------
// Timeline

inline constexpr std::array<int, 5> kBinWidthsDays{1, 3, 7, 14, 30};
inline constexpr std::size_t kMaxBins = 60;

/// Days touched by the range, counting from midnight UTC of the first day.
std::int64_t range_days(const TimeRange& range);
/// Smallest candidate width giving at most 60 bins (30 days otherwise).
int choose_bin_width_days(const TimeRange& range);

enum class HeightScale { kLog2, kLinear };

struct TimelineOptions {
  double min_height = 2.0;
  double height_unit = 1.0;
  HeightScale scale = HeightScale::kLog2;
};

double tile_height(std::int64_t retweets, const TimelineOptions& opt);

struct Tile {
  std::string tweet_id;
  std::string county_fips;
  std::int64_t retweet_count = 0;
  double y_offset = 0.0;  // distance from the axis to the tile's inner edge
  double height = 0.0;
  std::optional<double> color_value;
};

struct TimelineBin {
  Timestamp start = 0;
  Timestamp end = 0;       // exclusive
  std::vector<Tile> above;  // stance for, axis outward
  std::vector<Tile> below;  // stance against, axis outward
  std::optional<double> strip_sentiment_mean;
};

struct TimelineLayout {
  std::optional<MoralFrame> frame;
  std::string color_feature;
  int bin_width_days = 1;
  std::vector<TimelineBin> bins;

  std::size_t tile_count() const;
};

/// Bins span the dataset's whole time range regardless of the frame filter.
/// Throws InputError for an unknown color feature.
TimelineLayout layout_timeline(const FeatureTable& features, std::optional<MoralFrame> frame,
                               std::string_view color_feature, const TimelineOptions& opt = {});

}  // namespace motiv::analytics
