#include "motiv/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "motiv/errors.hpp"
#include "motiv/numeric.hpp"

namespace motiv::analytics {

std::optional<std::int64_t> political_leaning(const County& county) {
  const auto& d = county.demographics;
  if (!d.dem_votes || !d.rep_votes) return std::nullopt;
  return *d.dem_votes - *d.rep_votes;
}

FrameSummary frame_summary(const Dataset& dataset, MoralFrame frame) {
  FrameSummary s;
  s.frame = frame;
  std::size_t vivid = 0;
  std::size_t dem = 0;
  for (const Tweet& t : dataset.tweets()) {
    if (!t.frames.contains(frame)) continue;
    ++s.n_tweets;
    if (t.stance == Stance::kFor) {
      ++s.n_for;
      s.retweets_for += t.retweet_count;
    } else {
      ++s.n_against;
      s.retweets_against += t.retweet_count;
    }
    if (t.vivid) ++vivid;
    switch (t.sentiment_class) {
      case SentimentClass::kPositive: ++s.sentiment.positive; break;
      case SentimentClass::kNeutral: ++s.sentiment.neutral; break;
      case SentimentClass::kNegative: ++s.sentiment.negative; break;
    }
    if (const County* c = dataset.county(*t.county_fips)) {
      if (auto lean = political_leaning(*c)) {
        ++s.n_party_known;
        if (*lean > 0) ++dem;
      }
    }
  }
  if (s.n_tweets > 0) s.vivid_fraction = static_cast<double>(vivid) / static_cast<double>(s.n_tweets);
  if (s.n_party_known > 0) s.party_fraction_dem = static_cast<double>(dem) / static_cast<double>(s.n_party_known);
  return s;
}

std::vector<FrameSummary> frame_summaries(const Dataset& dataset) {
  std::vector<FrameSummary> out;
  out.reserve(kFrameCount);
  for (const auto& fi : kFrames) out.push_back(frame_summary(dataset, fi.frame));
  return out;
}

namespace {

constexpr std::pair<SortKey, std::string_view> kSortKeys[] = {
    {SortKey::kCanonical, "canonical"},   {SortKey::kStanceShare, "stance_share"},
    {SortKey::kPopularity, "popularity"}, {SortKey::kVividness, "vividness"},
    {SortKey::kSentiment, "sentiment"},   {SortKey::kParty, "party"},
};

double ratio(double num, std::size_t den) { return den == 0 ? 0.0 : num / static_cast<double>(den); }

}  // namespace

std::optional<SortKey> parse_sort_key(std::string_view s) {
  for (const auto& [k, name] : kSortKeys) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SortKey k) {
  for (const auto& [key, name] : kSortKeys) {
    if (key == k) return name;
  }
  return "canonical";
}

std::vector<std::string_view> sort_key_names() {
  std::vector<std::string_view> out;
  for (const auto& kv : kSortKeys) out.push_back(kv.second);
  return out;
}

double sort_value(const FrameSummary& s, SortKey key) {
  switch (key) {
    case SortKey::kCanonical: return static_cast<double>(index_of(s.frame));
    case SortKey::kStanceShare: return ratio(static_cast<double>(s.n_for), s.n_tweets);
    case SortKey::kPopularity:
      return static_cast<double>(s.retweets_for + s.retweets_against) + static_cast<double>(s.n_tweets);
    case SortKey::kVividness: return s.vivid_fraction;
    case SortKey::kSentiment:
      return ratio(static_cast<double>(s.sentiment.positive) - static_cast<double>(s.sentiment.negative), s.n_tweets);
    case SortKey::kParty: return s.party_fraction_dem;
  }
  return 0.0;
}

std::vector<MoralFrame> sort_frames(std::span<const FrameSummary> summaries, SortKey key, SortDirection dir) {
  std::vector<const FrameSummary*> order;
  for (const auto& s : summaries) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [&](const FrameSummary* a, const FrameSummary* b) {
    const double va = sort_value(*a, key);
    const double vb = sort_value(*b, key);
    return dir == SortDirection::kAsc ? va < vb : va > vb;
  });
  std::vector<MoralFrame> out;
  for (const auto* s : order) out.push_back(s->frame);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t CountyAggregate::count(std::optional<MoralFrame> frame, Stance stance) const {
  const std::size_t side = stance == Stance::kFor ? 0 : 1;
  if (frame) return counts[index_of(*frame)][side];
  return side == 0 ? for_total : against_total;
}

std::map<std::string, CountyAggregate> county_aggregates(const Dataset& dataset) {
  std::map<std::string, CountyAggregate> out;
  for (const auto& [fips, county] : dataset.counties()) {
    CountyAggregate a;
    a.fips = fips;
    a.leaning = political_leaning(county);
    for (std::size_t idx : dataset.tweets_in(fips)) {
      const Tweet& t = dataset.tweets()[idx];
      const std::size_t side = t.stance == Stance::kFor ? 0 : 1;
      t.frames.for_each([&](MoralFrame f) { ++a.counts[index_of(f)][side]; });
      ++(side == 0 ? a.for_total : a.against_total);
      ++a.total_tweets;
    }
    out.emplace(fips, std::move(a));
  }
  return out;
}

namespace {

template <typename Get>
std::optional<double> peak_per_capita(const County& county, const std::optional<TimeRange>& range, Get get) {
  const auto& pop = county.demographics.population;
  if (!pop || *pop <= 0 || county.covid_series.empty()) return std::nullopt;
  std::optional<std::int64_t> peak;
  for (const CovidPoint& p : county.covid_series) {
    if (range && (p.date < day_of(range->min) || p.date > day_of(range->max))) continue;
    peak = std::max(peak.value_or(0), get(p));
  }
  if (!peak) return std::nullopt;
  return static_cast<double>(*peak) / static_cast<double>(*pop);
}

std::string lower_name(MoralFrame f) { return to_lower(name_of(f)); }

}  // namespace

std::optional<double> covid_cases_per_capita(const County& county, const std::optional<TimeRange>& range) {
  return peak_per_capita(county, range, [](const CovidPoint& p) { return p.cases; });
}

std::optional<double> covid_deaths_per_capita(const County& county, const std::optional<TimeRange>& range) {
  return peak_per_capita(county, range, [](const CovidPoint& p) { return p.deaths; });
}

FeatureTable::FeatureTable(const Dataset& dataset) : dataset_(dataset), aggregates_(county_aggregates(dataset)) {}

const std::vector<std::string>& FeatureTable::county_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"population",       "dem_votes",       "rep_votes",
                               "leaning",          "median_income",   "mask_usage",
                               "covid_cases_per_capita", "covid_deaths_per_capita", "tweets_total",
                               "tweets_for",       "tweets_against"};
    for (const auto& fi : kFrames) {
      n.push_back(lower_name(fi.frame) + "_for");
      n.push_back(lower_name(fi.frame) + "_against");
    }
    return n;
  }();
  return names;
}

const std::vector<std::string>& FeatureTable::tweet_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"retweet_count", "sentiment", "vividness", "stance"};
    for (const auto& fi : kFrames) n.push_back(lower_name(fi.frame));
    return n;
  }();
  return names;
}

bool FeatureTable::is_county_feature(std::string_view name) {
  const auto& n = county_feature_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

bool FeatureTable::is_tweet_feature(std::string_view name) {
  const auto& n = tweet_feature_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

const CountyAggregate& FeatureTable::aggregate(const std::string& fips) const {
  auto it = aggregates_.find(fips);
  if (it == aggregates_.end()) throw InputError("unknown county " + fips);
  return it->second;
}

std::optional<double> FeatureTable::county_value(const County& county, std::string_view name) const {
  const Demographics& d = county.demographics;
  auto as_real = [](const std::optional<std::int64_t>& v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  if (name == "population") return as_real(d.population);
  if (name == "dem_votes") return as_real(d.dem_votes);
  if (name == "rep_votes") return as_real(d.rep_votes);
  if (name == "leaning") return as_real(political_leaning(county));
  if (name == "median_income") return d.median_income;
  if (name == "mask_usage") return d.mask_usage;
  if (name == "covid_cases_per_capita") return covid_cases_per_capita(county, dataset_.time_range());
  if (name == "covid_deaths_per_capita") return covid_deaths_per_capita(county, dataset_.time_range());

  const CountyAggregate& a = aggregate(county.fips);
  if (name == "tweets_total") return static_cast<double>(a.total_tweets);
  if (name == "tweets_for") return static_cast<double>(a.for_total);
  if (name == "tweets_against") return static_cast<double>(a.against_total);
  for (const auto& fi : kFrames) {
    const std::string base = lower_name(fi.frame);
    if (name == base + "_for") return static_cast<double>(a.counts[index_of(fi.frame)][0]);
    if (name == base + "_against") return static_cast<double>(a.counts[index_of(fi.frame)][1]);
  }
  throw InputError("unknown county feature '" + std::string(name) + "'");
}

std::optional<double> FeatureTable::tweet_value(const Tweet& tweet, std::string_view name) const {
  if (name == "retweet_count") return static_cast<double>(tweet.retweet_count);
  if (name == "sentiment") return tweet.sentiment_score;
  if (name == "vividness") return tweet.vivid ? 1.0 : 0.0;
  if (name == "stance") return tweet.stance == Stance::kFor ? 1.0 : 0.0;
  for (const auto& fi : kFrames) {
    if (name == lower_name(fi.frame)) return tweet.frames.contains(fi.frame) ? 1.0 : 0.0;
  }
  if (!is_county_feature(name)) throw InputError("unknown feature '" + std::string(name) + "'");
  const County* c = tweet.county_fips ? dataset_.county(*tweet.county_fips) : nullptr;
  if (c == nullptr) return std::nullopt;
  return county_value(*c, name);
}

// ---------------------------------------------------------------------------

std::int64_t range_days(const TimeRange& range) { return day_of(range.max) - day_of(range.min) + 1; }

int choose_bin_width_days(const TimeRange& range) {
  const std::int64_t days = range_days(range);
  for (int w : kBinWidthsDays) {
    const std::int64_t bins = (days + w - 1) / w;
    if (bins <= static_cast<std::int64_t>(kMaxBins)) return w;
  }
  return kBinWidthsDays.back();
}

double tile_height(std::int64_t retweets, const TimelineOptions& opt) {
  const double r = static_cast<double>(retweets);
  const double scaled = opt.scale == HeightScale::kLog2 ? std::log2(1.0 + r) : r;
  return opt.min_height + opt.height_unit * scaled;
}

std::size_t TimelineLayout::tile_count() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.above.size() + b.below.size();
  return n;
}

namespace {

void stack_side(std::vector<std::pair<const Tweet*, Tile>>& side, std::vector<Tile>& out) {
  std::sort(side.begin(), side.end(), [](const auto& a, const auto& b) {
    if (a.first->retweet_count != b.first->retweet_count) return a.first->retweet_count > b.first->retweet_count;
    return a.first->id < b.first->id;
  });
  double offset = 0.0;
  out.reserve(side.size());
  for (auto& [t, tile] : side) {
    tile.y_offset = offset;
    offset += tile.height;
    out.push_back(std::move(tile));
  }
}

}  // namespace

TimelineLayout layout_timeline(const FeatureTable& features, std::optional<MoralFrame> frame,
                               std::string_view color_feature, const TimelineOptions& opt) {
  if (!FeatureTable::is_tweet_feature(color_feature) && !FeatureTable::is_county_feature(color_feature)) {
    std::string valid;
    for (const auto* names : {&FeatureTable::tweet_feature_names(), &FeatureTable::county_feature_names()}) {
      for (const auto& n : *names) valid += (valid.empty() ? "" : ", ") + n;
    }
    throw InputError("unknown color feature '" + std::string(color_feature) + "'; valid features: " + valid);
  }
  const Dataset& ds = features.dataset();
  TimelineLayout layout;
  layout.frame = frame;
  layout.color_feature = std::string(color_feature);
  if (!ds.time_range()) return layout;

  const TimeRange range = *ds.time_range();
  layout.bin_width_days = choose_bin_width_days(range);
  const std::int64_t width = static_cast<std::int64_t>(layout.bin_width_days) * kSecondsPerDay;
  const Timestamp anchor = day_of(range.min) * kSecondsPerDay;
  const std::int64_t n_bins = (range_days(range) + layout.bin_width_days - 1) / layout.bin_width_days;

  struct Pending {
    std::vector<std::pair<const Tweet*, Tile>> above, below;
    double sentiment_sum = 0.0;
    std::size_t n = 0;
  };
  std::vector<Pending> pending(static_cast<std::size_t>(n_bins));
  for (const Tweet& t : ds.tweets()) {
    if (frame && !t.frames.contains(*frame)) continue;
    const auto b = static_cast<std::size_t>((t.timestamp - anchor) / width);
    Tile tile;
    tile.tweet_id = t.id;
    tile.county_fips = t.county_fips.value_or("");
    tile.retweet_count = t.retweet_count;
    tile.height = tile_height(t.retweet_count, opt);
    tile.color_value = features.tweet_value(t, color_feature);
    auto& p = pending[b];
    (t.stance == Stance::kFor ? p.above : p.below).emplace_back(&t, std::move(tile));
    p.sentiment_sum += t.sentiment_score;
    ++p.n;
  }

  layout.bins.resize(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    TimelineBin& bin = layout.bins[i];
    bin.start = anchor + static_cast<std::int64_t>(i) * width;
    bin.end = bin.start + width;
    stack_side(pending[i].above, bin.above);
    stack_side(pending[i].below, bin.below);
    if (pending[i].n > 0) bin.strip_sentiment_mean = pending[i].sentiment_sum / static_cast<double>(pending[i].n);
  }
  return layout;
}

}  // namespace motiv::analytics
