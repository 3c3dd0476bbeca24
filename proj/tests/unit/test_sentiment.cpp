#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "motiv/sentiment.hpp"

using namespace motiv;
using namespace motiv::sentiment;

namespace {

Lexicon fixture_lexicon() {
  Lexicon lex;
  lex.entries = {{"good", 1.9}, {"bad", -2.5}, {"safe", 1.8}, {"hate", -2.7}, {"love", 3.2}, {"sad", -2.1}};
  lex.boosters = {{"very", 1.0}, {"extremely", 1.0}, {"slightly", -1.0}};
  lex.negators = {"not", "never", "don't"};
  return lex;
}

const std::vector<std::string> kVocabulary = {"good", "bad",  "safe", "hate", "love",  "sad",  "very", "extremely",
                                              "slightly", "not", "never", "don't", "the", "stay", "home", "today"};

std::string random_text(std::mt19937_64& rng, bool allow_negators) {
  std::uniform_int_distribution<int> len(0, 14);
  std::uniform_int_distribution<std::size_t> pick(0, kVocabulary.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    std::string w = kVocabulary[pick(rng)];
    if (!allow_negators && (w == "not" || w == "never" || w == "don't")) w = "home";
    if (!out.empty()) out += (i % 4 == 0) ? ", " : " ";
    out += w;
  }
  return out;
}

// Direct transcription of the scoring rules over a pre-split token list.
double reference_score(const std::vector<std::string>& tokens, const Lexicon& lex) {
  const double distance[3] = {1.0, 0.95, 0.9};
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto hit = lex.entries.find(tokens[i]);
    if (hit == lex.entries.end()) continue;
    double v = hit->second;
    const double sign = v > 0 ? 1.0 : -1.0;
    bool negated = false;
    for (std::size_t d = 1; d <= 3 && d <= i; ++d) {
      const std::string& prev = tokens[i - d];
      if (lex.negators.count(prev)) negated = true;
      if (auto b = lex.boosters.find(prev); b != lex.boosters.end()) v += sign * 0.29 * b->second * distance[d - 1];
    }
    if (v * sign < 0) v = 0.0;
    if (negated) v *= -0.74;
    sum += v;
  }
  return sum == 0.0 ? 0.0 : sum / std::sqrt(sum * sum + 15.0);
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("worked examples") {
  Lexicon lex;
  lex.entries = {{"good", 1.9}};
  lex.negators = {"not"};
  CHECK(score_text("", lex) == 0.0);
  CHECK(score_text("nothing here", lex) == 0.0);
  CHECK(score_text("good", lex) == doctest::Approx(1.9 / std::sqrt(1.9 * 1.9 + 15)).epsilon(1e-12));
  CHECK(score_text("good", lex) == doctest::Approx(0.4404).epsilon(1e-4));
  const double neg = -0.74 * 1.9;
  CHECK(score_text("not good", lex) == doctest::Approx(neg / std::sqrt(neg * neg + 15)).epsilon(1e-12));
  CHECK(score_text("Not GOOD!", lex) == doctest::Approx(-0.3412).epsilon(1e-4));
  // Negator beyond the three-token window has no effect.
  CHECK(score_text("not a b c good", lex) == score_text("good", lex));
}

TEST_CASE("boosters scale with distance") {
  Lexicon lex = fixture_lexicon();
  const double near = 1.9 + 0.29;
  CHECK(score_text("very good", lex) == doctest::Approx(near / std::sqrt(near * near + 15)).epsilon(1e-12));
  const double far = 1.9 + 0.29 * 0.9;
  CHECK(score_text("very x y good", lex) == doctest::Approx(far / std::sqrt(far * far + 15)).epsilon(1e-12));
  const double damp = -2.5 + 0.29;
  CHECK(score_text("slightly bad", lex) == doctest::Approx(damp / std::sqrt(damp * damp + 15)).epsilon(1e-12));
}

TEST_CASE("tokenizer keeps apostrophes and lowercases") {
  CHECK(tokenize("Don't STOP, now!") == std::vector<std::string>{"don't", "stop", "now"});
  CHECK(tokenize("  ").empty());
}

TEST_CASE("classification thresholds") {
  CHECK(classify(0.26) == SentimentClass::kPositive);
  CHECK(classify(-0.26) == SentimentClass::kNegative);
  CHECK(classify(0.0) == SentimentClass::kNeutral);
  CHECK(classify(0.25) == SentimentClass::kNeutral);
  CHECK(classify(-0.25) == SentimentClass::kNeutral);
}

TEST_CASE("random texts agree with the reference scorer") {
  const Lexicon lex = fixture_lexicon();
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = random_text(rng, true);
    CHECK(score_text(text, lex) == doctest::Approx(reference_score(split_words(text), lex)).epsilon(1e-12));
  }
}

TEST_CASE("antisymmetry, boundedness and monotonicity") {
  const Lexicon lex = fixture_lexicon();
  Lexicon flipped = lex;
  for (auto& [tok, v] : flipped.entries) v = -v;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = random_text(rng, false);
    const double s = score_text(text, lex);
    CHECK(score_text(text, flipped) == -s);
    CHECK(s > -1.0);
    CHECK(s < 1.0);
    for (const char* pos : {"good", "safe", "love"}) CHECK(score_text(text + " " + pos, lex) >= s);
  }
}

TEST_CASE("lexicon files") {
  std::istringstream table("# comment\ngood\t1.9\nBad\t-2.5\n");
  const auto entries = read_valence_table(table, "lexicon.tsv");
  CHECK(entries.at("good") == 1.9);
  CHECK(entries.at("bad") == -2.5);
  std::istringstream list("not\nnever\n\n");
  CHECK(read_token_list(list, "negators.txt").size() == 2);
  CHECK(score_text("good", builtin_lexicon()) > 0.25);
}
