#include "motiv/sentiment.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <utility>

#include "motiv/errors.hpp"
#include "motiv/numeric.hpp"

namespace motiv::sentiment {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = c >= 0x80 || std::isalnum(c) != 0 || c == '\'' || c == '_';
    if (word) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  // Leading/trailing quotes are punctuation, not part of the word.
  for (auto& t : tokens) {
    while (!t.empty() && t.front() == '\'') t.erase(0, 1);
    while (!t.empty() && t.back() == '\'') t.pop_back();
  }
  std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  return tokens;
}

double score_text(std::string_view text, const Lexicon& lexicon, const Rules& rules) {
  const std::vector<std::string> tokens = tokenize(text);
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto hit = lexicon.entries.find(tokens[i]);
    if (hit == lexicon.entries.end()) continue;
    const double base = hit->second;
    const double sign = base > 0 ? 1.0 : (base < 0 ? -1.0 : 0.0);
    double v = base;
    bool negated = false;
    for (int d = 1; d <= rules.window && static_cast<std::size_t>(d) <= i; ++d) {
      const std::string& prev = tokens[i - static_cast<std::size_t>(d)];
      if (auto b = lexicon.boosters.find(prev); b != lexicon.boosters.end()) {
        const double factor = d <= 3 ? rules.distance_factors[d - 1] : rules.distance_factors[2];
        v += sign * rules.booster_step * b->second * factor;
      }
      if (lexicon.negators.count(prev)) negated = true;
    }
    // Dampeners shrink a valence toward zero but never flip it.
    if (v * sign < 0.0) v = 0.0;
    if (negated) v *= rules.negation_factor;
    sum += v;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + rules.normalization);
}

SentimentClass classify(double score) {
  if (score > kClassThreshold) return SentimentClass::kPositive;
  if (score < -kClassThreshold) return SentimentClass::kNegative;
  return SentimentClass::kNeutral;
}

std::map<std::string, double, std::less<>> read_valence_table(std::istream& in, std::string_view source) {
  std::map<std::string, double, std::less<>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    auto where = [&] { return std::string(source) + ":" + std::to_string(n) + ": "; };
    if (tab == std::string::npos) throw InputError(where() + "expected token<TAB>value");
    const std::string token = to_lower(trim(std::string_view(line).substr(0, tab)));
    std::string_view rest = std::string_view(line).substr(tab + 1);
    rest = rest.substr(0, rest.find('\t'));  // extra columns are ignored
    auto v = parse_double(rest);
    if (token.empty() || !v) throw InputError(where() + "invalid entry");
    if (!out.emplace(token, *v).second) throw InputError(where() + "duplicate token '" + token + "'");
  }
  return out;
}

std::set<std::string, std::less<>> read_token_list(std::istream& in, std::string_view source) {
  std::set<std::string, std::less<>> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = to_lower(trim(line));
    if (t.empty() || t[0] == '#') continue;
    out.insert(t);
  }
  (void)source;
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& lexicon, const std::filesystem::path& boosters,
                     const std::filesystem::path& negators) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot read " + p.string());
    return in;
  };
  Lexicon lex;
  auto li = open(lexicon);
  lex.entries = read_valence_table(li, lexicon.string());
  for (const auto& [tok, v] : lex.entries) {
    if (v < -4.0 || v > 4.0) throw InputError(lexicon.string() + ": valence of '" + tok + "' outside [-4, 4]");
  }
  if (!boosters.empty()) {
    auto bi = open(boosters);
    lex.boosters = read_valence_table(bi, boosters.string());
  }
  if (!negators.empty()) {
    auto ni = open(negators);
    lex.negators = read_token_list(ni, negators.string());
  }
  return lex;
}

const Lexicon& builtin_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    const std::pair<const char*, double> entries[] = {
        {"good", 1.9},       {"great", 3.1},      {"love", 3.2},       {"happy", 2.7},     {"safe", 1.9},
        {"safer", 1.8},      {"thank", 1.5},      {"thanks", 1.9},     {"grateful", 2.0},  {"hope", 1.9},
        {"hopeful", 2.3},    {"support", 1.7},    {"protect", 1.6},    {"care", 2.2},      {"caring", 2.2},
        {"help", 1.7},       {"helping", 1.7},    {"healthy", 1.7},    {"strong", 2.3},    {"proud", 2.1},
        {"free", 2.3},       {"freedom", 3.2},    {"fair", 1.3},       {"justice", 2.4},   {"peace", 2.5},
        {"peaceful", 2.2},   {"kind", 2.4},       {"best", 3.2},       {"better", 1.9},    {"wonderful", 2.7},
        {"together", 1.0},   {"heroes", 2.3},     {"hero", 2.6},       {"win", 2.8},       {"agree", 1.5},
        {"bad", -2.5},       {"worse", -2.1},     {"worst", -3.1},     {"hate", -2.7},     {"sad", -2.1},
        {"angry", -2.3},     {"anger", -2.7},     {"fear", -2.2},      {"afraid", -2.0},   {"scared", -1.9},
        {"sick", -2.3},      {"death", -2.9},     {"dead", -3.3},      {"die", -2.9},      {"dying", -2.8},
        {"kill", -3.7},      {"killed", -3.5},    {"killing", -3.4},   {"danger", -2.4},   {"dangerous", -2.1},
        {"crisis", -3.1},    {"tyranny", -2.9},   {"unfair", -2.1},    {"injustice", -2.7}, {"oppression", -2.6},
        {"stupid", -2.4},    {"idiots", -2.3},    {"selfish", -2.1},   {"lies", -1.8},     {"liar", -2.6},
        {"wrong", -2.1},     {"fail", -2.5},      {"failed", -2.3},    {"failure", -2.6},  {"disaster", -3.1},
        {"terrible", -2.1},  {"awful", -2.0},     {"horrible", -2.5},  {"suffer", -2.5},   {"suffering", -2.1},
        {"lonely", -1.5},    {"broke", -1.8},     {"protest", -1.0},   {"riot", -2.6},     {"violence", -3.1},
        {"racist", -3.1},    {"racism", -3.1},    {"brutality", -2.9}, {"ruin", -2.8},     {"ruined", -2.4},
    };
    for (const auto& [tok, v] : entries) l.entries.emplace(tok, v);
    const std::pair<const char*, double> boosters[] = {
        {"very", 1.0},      {"really", 1.0},   {"so", 1.0},        {"extremely", 1.0}, {"absolutely", 1.0},
        {"totally", 1.0},   {"incredibly", 1.0}, {"completely", 1.0}, {"most", 1.0},   {"too", 1.0},
        {"slightly", -1.0}, {"somewhat", -1.0}, {"barely", -1.0},   {"kinda", -1.0},    {"hardly", -1.0},
    };
    for (const auto& [tok, v] : boosters) l.boosters.emplace(tok, v);
    for (const char* tok : {"not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "without", "don't",
                            "doesn't", "didn't", "isn't", "aren't", "wasn't", "weren't", "won't", "can't",
                            "cannot", "shouldn't", "wouldn't", "couldn't", "ain't"}) {
      l.negators.insert(tok);
    }
    return l;
  }();
  return lex;
}

}  // namespace motiv::sentiment
