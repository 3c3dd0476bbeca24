#include "motiv/pipeline.hpp"

#include <algorithm>
#include <future>
#include <sstream>
#include <thread>

#include "motiv/errors.hpp"

namespace motiv {

std::vector<std::optional<Assignment>> assign_all(const std::vector<Tweet>& tweets,
                                                  const std::vector<CountyGeometry>& counties, double threshold,
                                                  unsigned threads) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InputError("overlap threshold must be in (0, 1]");
  std::vector<CountyShape> shapes;
  shapes.reserve(counties.size());
  for (const CountyGeometry& c : counties) shapes.push_back({c.fips, c.polygons, bounds_of(c.polygons)});
  std::sort(shapes.begin(), shapes.end(), [](const CountyShape& a, const CountyShape& b) { return a.fips < b.fips; });

  std::vector<std::optional<Assignment>> out(tweets.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, tweets.size() / 64)));
  const std::size_t chunk = (tweets.size() + threads - 1) / std::max(1u, threads);
  std::vector<std::future<void>> jobs;
  for (std::size_t start = 0; start < tweets.size(); start += chunk) {
    const std::size_t end = std::min(tweets.size(), start + chunk);
    jobs.push_back(std::async(std::launch::async, [&, start, end] {
      for (std::size_t i = start; i < end; ++i) out[i] = assign_county(tweets[i].bbox, shapes, threshold);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

IngestResult ingest(TweetLoad tweets, const std::vector<CountyGeometry>& counties,
                    const std::map<std::string, Demographics>& demographics,
                    const std::map<std::string, std::vector<CovidPoint>>& covid, const IngestOptions& options) {
  IngestReport report;
  report.rows_in = tweets.rows;
  report.dropped_no_stance_or_frame = tweets.dropped;
  report.rejected_malformed = tweets.rejected;
  report.diagnostics = tweets.diagnostics;

  const sentiment::Lexicon& lexicon = options.lexicon ? *options.lexicon : sentiment::builtin_lexicon();
  for (Tweet& t : tweets.tweets) {
    t.sentiment_score = sentiment::score_text(t.text, lexicon);
    t.sentiment_class = sentiment::classify(t.sentiment_score);
  }

  const auto assignments = assign_all(tweets.tweets, counties, options.overlap_threshold, options.threads);
  BuildResult built =
      build_dataset(std::move(tweets.tweets), counties, demographics, covid, assignments, options.topic);

  report.excluded_unassigned = built.excluded_unassigned;
  report.excluded_unknown_county = built.excluded_unknown_county;
  report.diagnostics.insert(report.diagnostics.end(), built.diagnostics.begin(), built.diagnostics.end());
  const Dataset& ds = *built.dataset;
  report.retained = ds.tweets().size();
  report.counties = ds.counties().size();
  for (const auto& [fips, c] : ds.counties()) {
    if (!ds.tweets_in(fips).empty()) ++report.counties_with_tweets;
    if (c.demographics_missing) ++report.counties_missing_demographics;
  }
  for (const Tweet& t : ds.tweets()) {
    t.frames.for_each([&](MoralFrame f) { ++report.frame_counts[index_of(f)]; });
  }
  return {built.dataset, std::move(report)};
}

IngestResult ingest(const IngestPaths& paths, const IngestOptions& options) {
  for (const auto* p : {&paths.tweets, &paths.counties, &paths.demographics, &paths.covid}) {
    if (p->empty() || !std::filesystem::is_regular_file(*p)) throw InputError("cannot read " + p->string());
  }
  TweetFormat format;
  format.hashtags = options.hashtags;
  TweetLoad tweets = load_tweets(paths.tweets, format);
  const auto counties = load_counties(paths.counties);
  const auto demographics = load_demographics(paths.demographics);
  const auto covid = load_covid(paths.covid);
  return ingest(std::move(tweets), counties, demographics, covid, options);
}

std::string IngestReport::to_text() const {
  std::ostringstream out;
  out << "rows in:                      " << rows_in << "\n"
      << "retained:                     " << retained << "\n"
      << "dropped (no stance/frame):    " << dropped_no_stance_or_frame << "\n"
      << "rejected (malformed):         " << rejected_malformed << "\n"
      << "excluded (below overlap):     " << excluded_unassigned << "\n"
      << "excluded (unknown county):    " << excluded_unknown_county << "\n"
      << "counties:                     " << counties << "\n"
      << "counties with tweets:         " << counties_with_tweets << "\n"
      << "counties w/o demographics:    " << counties_missing_demographics << "\n"
      << "\nframe          tweets\n";
  for (const auto& fi : kFrames) {
    std::string name(fi.name);
    name.resize(15, ' ');
    out << name << frame_counts[index_of(fi.frame)] << "\n";
  }
  if (!diagnostics.empty()) {
    out << "\ndiagnostics:\n";
    for (const Diagnostic& d : diagnostics) {
      out << "  ";
      if (d.line) out << "line " << d.line << ": ";
      out << d.message << "\n";
    }
  }
  return out.str();
}

}  // namespace motiv
