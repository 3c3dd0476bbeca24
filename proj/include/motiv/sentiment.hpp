#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "motiv/corpus.hpp"

namespace motiv::sentiment {

struct Lexicon {
  std::map<std::string, double, std::less<>> entries;   // token -> valence in [-4, 4]
  std::map<std::string, double, std::less<>> boosters;  // token -> increment units (+1 boost, -1 dampen)
  std::set<std::string, std::less<>> negators;
};

struct Rules {
  int window = 3;                 // tokens looked back for negators and boosters
  double negation_factor = -0.74;
  double booster_step = 0.29;
  double normalization = 15.0;    // S / sqrt(S^2 + normalization)
  double distance_factors[3] = {1.0, 0.95, 0.9};
};

/// Lowercased tokens split on whitespace and ASCII punctuation; apostrophes
/// stay inside a token ("don't").
std::vector<std::string> tokenize(std::string_view text);

/// Valence sum normalized into (-1, 1). Empty text or no lexicon hits
/// scores 0.
double score_text(std::string_view text, const Lexicon& lexicon, const Rules& rules = {});

inline constexpr double kClassThreshold = 0.25;

/// > 0.25 positive, < -0.25 negative, otherwise neutral.
SentimentClass classify(double score);

/// `token<TAB>value` per line; `#` starts a comment.
std::map<std::string, double, std::less<>> read_valence_table(std::istream& in, std::string_view source);
/// One token per line.
std::set<std::string, std::less<>> read_token_list(std::istream& in, std::string_view source);

Lexicon load_lexicon(const std::filesystem::path& lexicon, const std::filesystem::path& boosters,
                     const std::filesystem::path& negators);

/// Small general-purpose English lexicon compiled into the library, used
/// when no lexicon files are supplied.
const Lexicon& builtin_lexicon();

}  // namespace motiv::sentiment
