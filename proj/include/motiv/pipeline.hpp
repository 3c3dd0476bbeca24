#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "motiv/corpus.hpp"
#include "motiv/sentiment.hpp"

namespace motiv {

struct IngestPaths {
  std::filesystem::path tweets;
  std::filesystem::path counties;
  std::filesystem::path demographics;
  std::filesystem::path covid;
};

struct IngestOptions {
  double overlap_threshold = kDefaultOverlapThreshold;
  std::optional<HashtagRule> hashtags;
  const sentiment::Lexicon* lexicon = nullptr;  // built-in lexicon when null
  std::string topic;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct IngestReport {
  std::size_t rows_in = 0;
  std::size_t retained = 0;
  std::size_t dropped_no_stance_or_frame = 0;
  std::size_t rejected_malformed = 0;
  std::size_t excluded_unassigned = 0;
  std::size_t excluded_unknown_county = 0;
  std::size_t counties = 0;
  std::size_t counties_with_tweets = 0;
  std::size_t counties_missing_demographics = 0;
  std::array<std::size_t, kFrameCount> frame_counts{};
  std::vector<Diagnostic> diagnostics;

  std::size_t dropped_total() const {
    return dropped_no_stance_or_frame + rejected_malformed + excluded_unassigned + excluded_unknown_county;
  }
  std::string to_text() const;
};

struct IngestResult {
  std::shared_ptr<const Dataset> dataset;
  IngestReport report;
};

/// Assigns every tweet's bbox to a county. Output is parallel to `tweets`
/// whatever the thread count.
std::vector<std::optional<Assignment>> assign_all(const std::vector<Tweet>& tweets,
                                                  const std::vector<CountyGeometry>& counties, double threshold,
                                                  unsigned threads = 0);

/// parse -> sentiment -> geo-assignment -> join.
IngestResult ingest(TweetLoad tweets, const std::vector<CountyGeometry>& counties,
                    const std::map<std::string, Demographics>& demographics,
                    const std::map<std::string, std::vector<CovidPoint>>& covid, const IngestOptions& options);

/// Same, reading the four input files. Throws InputError naming the first
/// unreadable path.
IngestResult ingest(const IngestPaths& paths, const IngestOptions& options);

}  // namespace motiv
