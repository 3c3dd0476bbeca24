// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "motiv/api.hpp"
#include "motiv/gam.hpp"
#include "motiv/geo.hpp"
#include "motiv/glyph.hpp"
#include "motiv/sentiment.hpp"

// After Eigen: <resolv.h> defines _res.
#include "httplib.h"

using namespace motiv;
using api::json;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kGeoFractionTol = 0.01;
constexpr double kGeoThresholdBand = 0.01;
constexpr double kGeoSeconds = 2.0;
constexpr double kGamLinearTol = 1e-6;
constexpr double kGamDenseTol = 1e-8;
constexpr double kGamGradientRel = 1e-6;
constexpr double kGamPdTol = 1e-8;
constexpr double kGamSeconds = 60.0;
constexpr double kGlyphPenetration = 0.05;
constexpr double kGlyphSeconds = 5.0;
constexpr double kEndToEndSeconds = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    pass_ = pass_ && ok;
  }
  Outcome outcome(const std::string& summary) const {
    std::string d = summary;
    for (const auto& f : failures_) d += "; " + f;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failures_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixture(const std::string& name) { return std::string(MOTIV_FIXTURES) + "/" + name; }

// ---------------------------------------------------------------------------

Outcome geo_assignment() {
  constexpr int kGrid = 10;
  std::vector<std::vector<Polygon>> polys;
  std::vector<std::string> names;
  for (int ix = 0; ix < kGrid; ++ix) {
    for (int iy = 0; iy < kGrid; ++iy) {
      const double x = ix, y = iy;
      polys.push_back({Polygon{{{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}}, {}}});
      char fips[8];
      std::snprintf(fips, sizeof fips, "%05d", 10000 + ix * kGrid + iy);
      names.push_back(fips);
    }
  }
  std::vector<CountyShape> shapes;
  for (std::size_t i = 0; i < polys.size(); ++i) shapes.push_back({names[i], polys[i], bounds_of(polys[i])});

  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> centre(-0.5, kGrid + 0.5);
  std::uniform_real_distribution<double> side(0.02, 3.0);
  std::vector<BBox> boxes;
  for (int i = 0; i < 500; ++i) {
    const double cx = centre(rng), cy = centre(rng), w = side(rng), h = side(rng);
    boxes.push_back({cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2});
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::vector<OverlapResult>> fractions;
  std::vector<std::optional<Assignment>> argmax, assigned;
  for (const BBox& b : boxes) {
    fractions.push_back(overlap_fractions(b, shapes));
    argmax.push_back(assign_county(b, shapes, std::numeric_limits<double>::min()));
    assigned.push_back(assign_county(b, shapes));
  }
  const double elapsed = seconds_since(t0);

  // Midpoint rasterization over a 317 x 317 lattice (about 1e5 samples).
  constexpr int kN = 317;
  Check c;
  int argmax_ok = 0, ties = 0, rule_checked = 0, rule_ok = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const BBox& b = boxes[k];
    std::map<std::string, double> oracle;
    for (int i = 0; i < kN; ++i) {
      const double x = b.min_x + (i + 0.5) * b.width() / kN;
      for (int j = 0; j < kN; ++j) {
        const double y = b.min_y + (j + 0.5) * b.height() / kN;
        if (x < 0 || y < 0 || x >= kGrid || y >= kGrid) continue;
        oracle[names[static_cast<int>(x) * kGrid + static_cast<int>(y)]] += 1.0 / (kN * kN);
      }
    }
    std::map<std::string, double> ours;
    for (const auto& r : fractions[k]) ours[r.fips] = r.overlap_fraction;
    for (const auto& [f, v] : oracle) worst = std::max(worst, std::abs(v - (ours.count(f) ? ours[f] : 0.0)));
    for (const auto& [f, v] : ours) worst = std::max(worst, std::abs(v - (oracle.count(f) ? oracle[f] : 0.0)));

    double top = 0.0;
    for (const auto& [f, v] : oracle) top = std::max(top, v);

    // The argmax is checked against exact interval products, since whole
    // squares inside a bbox tie exactly and the lattice cannot order them.
    std::string exact_fips;
    double exact_top = 0.0;
    int tied = 0;
    for (int ix = 0; ix < kGrid; ++ix) {
      for (int iy = 0; iy < kGrid; ++iy) {
        const double ox = std::max(0.0, std::min(b.max_x, ix + 1.0) - std::max(b.min_x, double(ix)));
        const double oy = std::max(0.0, std::min(b.max_y, iy + 1.0) - std::max(b.min_y, double(iy)));
        const double v = ox * oy / b.area();
        if (v > exact_top + 1e-12) {
          exact_top = v;
          exact_fips = names[ix * kGrid + iy];
          tied = 1;
        } else if (v > 0.0 && std::abs(v - exact_top) <= 1e-12) {
          ++tied;
        }
      }
    }
    ties += tied > 1 ? 1 : 0;
    const bool ok = exact_top == 0.0 ? !argmax[k] : argmax[k] && argmax[k]->fips == exact_fips;
    argmax_ok += ok ? 1 : 0;
    c.require(ok, "argmax mismatch on bbox " + std::to_string(k));

    if (std::abs(top - kDefaultOverlapThreshold) > kGeoThresholdBand) {
      ++rule_checked;
      const bool rule = assigned[k].has_value() == (top >= kDefaultOverlapThreshold);
      rule_ok += rule ? 1 : 0;
      c.require(rule, "25% rule wrong on bbox " + std::to_string(k));
    }
  }
  c.require(worst <= kGeoFractionTol, "fraction error " + num(worst));
  c.require(elapsed < kGeoSeconds, "too slow");
  return c.outcome("argmax " + std::to_string(argmax_ok) + "/500 (" + std::to_string(ties) +
                   " exact ties), max |fraction - oracle| " + num(worst) + ", 25% rule " + std::to_string(rule_ok) +
                   "/" + std::to_string(rule_checked) + ", " + num(elapsed) + " s");
}

// ---------------------------------------------------------------------------

Eigen::VectorXd normal(int n, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, sd);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

gam::ModelSpec spec_of(std::vector<gam::TermSpec> terms) {
  gam::ModelSpec s;
  s.target = "y";
  s.terms = std::move(terms);
  return s;
}

double cox_de_boor(const std::vector<double>& t, int i, int d, double x) {
  if (d == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  double left = 0.0, right = 0.0;
  if (t[i + d] != t[i]) left = (x - t[i]) / (t[i + d] - t[i]) * cox_de_boor(t, i, d - 1, x);
  if (t[i + d + 1] != t[i + 1]) right = (t[i + d + 1] - x) / (t[i + d + 1] - t[i + 1]) * cox_de_boor(t, i + 1, d - 1, x);
  return left + right;
}

Outcome gam_correctness() {
  using gam::TermKind;
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-2.0, 2.0);

  // (a) noiseless linear recovery.
  double err_a = 0.0;
  {
    const int n = 60;
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 5.0 * u(rng);
    const Eigen::VectorXd y = (1.5 + 2.0 * x.col(0).array() - 3.0 * x.col(1).array()).matrix();
    const auto m = gam::fit(gam::make_table("y", y, {"a", "b"}, x),
                            spec_of({{"a", TermKind::kLinear}, {"b", TermKind::kLinear}}));
    err_a = std::max({std::abs(m.term("a").slope() - 2.0), std::abs(m.term("b").slope() + 3.0),
                      std::abs(m.intercept_at_origin() - 1.5)});
  }
  c.require(err_a < kGamLinearTol, "(a) " + num(err_a));

  // (b) lambda = 0 spline against normal equations on the Cox-de Boor basis.
  double err_b = 0.0;
  {
    const int n = 150, k = 10;
    Eigen::VectorXd x(n);
    for (auto& v : x) v = u(rng);
    const Eigen::VectorXd y = x.array().sin().matrix() + normal(n, 0.2, rng);
    auto spec = spec_of({{"x", TermKind::kSpline}});
    spec.spline_basis_size = k;
    const auto m = gam::fit_at(gam::make_table("y", y, {"x"}, x), spec, 0.0);
    const double lo = x.minCoeff(), hi = x.maxCoeff(), h = (hi - lo) / (k - 3);
    std::vector<double> knots;
    for (int i = 0; i < k + 4; ++i) knots.push_back(lo + (i - 3) * h);
    Eigen::MatrixXd b(n, k);
    for (int r = 0; r < n; ++r) {
      const double xr = x(r) >= hi ? std::nextafter(hi, lo) : x(r);
      for (int i = 0; i < k; ++i) b(r, i) = cox_de_boor(knots, i, 3, xr);
    }
    const Eigen::VectorXd gamma = (b.transpose() * b).ldlt().solve(b.transpose() * y);
    err_b = (m.fitted - b * gamma).cwiseAbs().maxCoeff();
  }
  c.require(err_b < kGamDenseTol, "(b) " + num(err_b));

  // (c) gradient of the penalized objective at the GCV solution.
  double grad_rel = 0.0;
  {
    const int n = 200;
    Eigen::MatrixXd x(n, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    const Eigen::VectorXd y = (x.col(0).array().sin() + 0.5 * x.col(1).array().square() - 0.7 * x.col(2).array())
                                  .matrix() +
                              normal(n, 0.1, rng);
    const auto t = gam::make_table("y", y, {"a", "b", "c"}, x);
    const auto m =
        gam::fit(t, spec_of({{"a", TermKind::kSpline}, {"b", TermKind::kSpline}, {"c", TermKind::kLinear}}));
    const auto pd = gam::penalized_design(m, t);
    const Eigen::VectorXd grad = -2.0 * pd.x.transpose() * (y - pd.x * m.beta) + 2.0 * m.lambda * pd.penalty * m.beta;
    grad_rel = grad.norm() / y.norm();
  }
  c.require(grad_rel < kGamGradientRel, "(c) " + num(grad_rel));

  // (d) partial dependence of linear terms.
  double err_d = 0.0;
  {
    const int n = 90;
    Eigen::MatrixXd x(n, 2);
    x << normal(n, 3.0, rng).array() + 10.0, normal(n, 0.5, rng);
    const Eigen::VectorXd y = (1.5 * x.col(0) - 4.0 * x.col(1)).array() + 2.0 + normal(n, 1.0, rng).array();
    const auto t = gam::make_table("y", y, {"a", "b"}, x);
    const auto m = gam::fit(t, spec_of({{"a", TermKind::kLinear}, {"b", TermKind::kLinear}}));
    for (const char* f : {"a", "b"}) {
      const auto pd = gam::partial_dependence(m, f);
      const double beta = m.term(f).slope();
      for (std::size_t i = 1; i < pd.grid.size(); ++i) {
        err_d = std::max(err_d, std::abs((pd.values[i] - pd.values[0]) / (pd.grid[i] - pd.grid[0]) - beta));
      }
      double mean = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) mean += m.term(f).value(t.x(r, t.column(f)));
      err_d = std::max(err_d, std::abs(mean / n));
    }
  }
  c.require(err_d < kGamPdTol, "(d) " + num(err_d));

  // (e) null predictor calibration.
  int rejections = 0;
  for (int r = 0; r < 200; ++r) {
    const Eigen::VectorXd x = normal(100, 1.0, rng);
    const Eigen::VectorXd y = normal(100, 1.0, rng);
    const auto m = gam::fit(gam::make_table("y", y, {"x"}, x), spec_of({{"x", TermKind::kLinear}}));
    rejections += gam::linear_pvalues(m)[0].p_value < 0.05 ? 1 : 0;
  }
  const double rate = rejections / 200.0;
  c.require(rate >= 0.01 && rate <= 0.10, "(e) rate " + num(rate));

  const double elapsed = seconds_since(t0);
  c.require(elapsed < kGamSeconds, "too slow");
  return c.outcome("(a) " + num(err_a) + " (b) " + num(err_b) + " (c) " + num(grad_rel) + " (d) " + num(err_d) +
                   " (e) " + num(rate) + ", " + num(elapsed) + " s");
}

// ---------------------------------------------------------------------------

Outcome sentiment_thresholds() {
  Check c;
  const std::vector<std::pair<double, SentimentClass>> cases{{0.26, SentimentClass::kPositive},
                                                             {-0.26, SentimentClass::kNegative},
                                                             {0.0, SentimentClass::kNeutral},
                                                             {0.25, SentimentClass::kNeutral},
                                                             {-0.25, SentimentClass::kNeutral}};
  for (const auto& [s, want] : cases) c.require(sentiment::classify(s) == want, "classify(" + num(s) + ")");

  const auto lex = sentiment::load_lexicon(fixture("lexicon.tsv"), fixture("boosters.tsv"), fixture("negators.tsv"));
  auto flipped = lex;
  for (auto& [tok, v] : flipped.entries) v = -v;
  std::vector<std::string> vocab;
  for (const auto& [tok, v] : lex.entries) vocab.push_back(tok);
  for (const auto& [tok, v] : lex.boosters) vocab.push_back(tok);
  for (const char* w : {"the", "stay", "home", "today", "masks", "we"}) vocab.push_back(w);

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 20);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  int antisymmetric = 0, bounded = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    for (int n = len(rng), k = 0; k < n; ++k) text += (k ? (k % 5 ? " " : ", ") : "") + vocab[pick(rng)];
    const double s = sentiment::score_text(text, lex);
    antisymmetric += sentiment::score_text(text, flipped) == -s ? 1 : 0;
    bounded += (s > -1.0 && s < 1.0) ? 1 : 0;
  }
  c.require(antisymmetric == 1000, "antisymmetry");
  c.require(bounded == 1000, "boundedness");
  return c.outcome("5/5 thresholds, antisymmetric " + std::to_string(antisymmetric) + "/1000, bounded " +
                   std::to_string(bounded) + "/1000");
}

// ---------------------------------------------------------------------------

Outcome timeline_layout() {
  Check c;
  const Timestamp start = parse_timestamp("2020-03-01T00:00:00Z");
  std::mt19937_64 rng(122);
  std::uniform_int_distribution<std::int64_t> when(0, 122 * kSecondsPerDay - 1);
  std::uniform_int_distribution<std::int64_t> rts(0, 500);
  std::vector<Tweet> tweets;
  for (int i = 0; i < 200; ++i) {
    Tweet t;
    t.id = "t" + std::to_string(1000 + i);
    t.timestamp = i == 0 ? start : i == 1 ? start + 122 * kSecondsPerDay - 1 : start + when(rng);
    t.retweet_count = rts(rng);
    t.stance = i % 3 ? Stance::kFor : Stance::kAgainst;
    t.frames.insert(i % 4 ? MoralFrame::kCare : MoralFrame::kFreedom);
    t.bbox = {0.5, 0.5, 0.5, 0.5};
    tweets.push_back(t);
  }
  const std::vector<CountyGeometry> counties{
      {"01001", "Only", {Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}, {}}}}};
  const std::vector<std::optional<Assignment>> assignments(tweets.size(), Assignment{"01001", 1.0});
  const auto ds = build_dataset(tweets, counties, {}, {}, assignments).dataset;
  const analytics::FeatureTable features(*ds);

  std::size_t n_care = 0;
  for (const Tweet& t : tweets) n_care += t.frames.contains(MoralFrame::kCare) ? 1 : 0;

  std::size_t order_errors = 0, offset_errors = 0;
  int width = 0;
  std::size_t tiles_all = 0, tiles_care = 0;
  for (const std::optional<MoralFrame> frame : {std::optional<MoralFrame>{}, std::optional(MoralFrame::kCare)}) {
    const auto layout = analytics::layout_timeline(features, frame, "sentiment");
    width = layout.bin_width_days;
    (frame ? tiles_care : tiles_all) = layout.tile_count();
    for (const auto& bin : layout.bins) {
      for (const auto* side : {&bin.above, &bin.below}) {
        double prefix = 0.0;
        for (std::size_t i = 0; i < side->size(); ++i) {
          const auto& tile = (*side)[i];
          if (i > 0 && (*side)[i - 1].retweet_count < tile.retweet_count) ++order_errors;
          if (tile.y_offset != prefix) ++offset_errors;
          prefix += tile.height;
        }
      }
    }
  }
  c.require(width == 3, "bin width " + std::to_string(width));
  c.require(order_errors == 0, "order");
  c.require(offset_errors == 0, "prefix sums");
  c.require(tiles_all == 200 && tiles_care == n_care, "tile count");
  return c.outcome("bin width " + std::to_string(width) + " d, tiles " + std::to_string(tiles_all) + "/200 and " +
                   std::to_string(tiles_care) + "/" + std::to_string(n_care) + " (Care), order errors " +
                   std::to_string(order_errors) + ", offset errors " + std::to_string(offset_errors));
}

// ---------------------------------------------------------------------------

// Depth along the centre line to the scaled-distance boundary.
double oracle_penetration(const glyph::Glyph& a, const glyph::Glyph& b) {
  const double ax = a.half_width, ay = std::max(a.upper_radius, a.lower_radius);
  const double bx = b.half_width, by = std::max(b.upper_radius, b.lower_radius);
  const double dx = b.position.x - a.position.x, dy = b.position.y - a.position.y;
  const double s = std::pow(dx / (ax + bx), 2) + std::pow(dy / (ay + by), 2);
  if (s >= 1.0) return 0.0;
  if (s == 0.0) return ax + bx;
  const double d = std::sqrt(dx * dx + dy * dy);
  return d / std::sqrt(s) - d;
}

std::vector<glyph::Glyph> national_glyphs() {
  constexpr int kCounties = 3113;
  constexpr double kTweets = 20000;
  std::mt19937_64 rng(3113);
  std::uniform_real_distribution<double> lon(-124.0, -68.0), lat(25.0, 49.0);
  std::lognormal_distribution<double> pop(10.3, 1.4);
  std::vector<County> counties(kCounties);
  std::vector<analytics::CountyAggregate> aggs(kCounties);
  double total = 0.0;
  for (auto& c : counties) {
    c.demographics.population = static_cast<std::int64_t>(std::ceil(pop(rng)));
    total += static_cast<double>(*c.demographics.population);
  }
  glyph::Extents e;
  e.min_population = e.max_population = static_cast<double>(*counties[0].demographics.population);
  for (int i = 0; i < kCounties; ++i) {
    char fips[8];
    std::snprintf(fips, sizeof fips, "%05d", 1001 + 2 * i);
    counties[i].fips = aggs[i].fips = fips;
    const double p = static_cast<double>(*counties[i].demographics.population);
    std::poisson_distribution<int> f(0.6 * kTweets * p / total), a(0.4 * kTweets * p / total);
    aggs[i].for_total = f(rng);
    aggs[i].against_total = a(rng);
    e.min_population = std::min(e.min_population, p);
    e.max_population = std::max(e.max_population, p);
    e.max_count = std::max({e.max_count, static_cast<double>(aggs[i].for_total), static_cast<double>(aggs[i].against_total)});
  }
  const glyph::Scales scales;
  std::vector<glyph::Glyph> out;
  for (int i = 0; i < kCounties; ++i) {
    auto g = glyph::glyph_shape(counties[i], aggs[i], std::nullopt, e, scales);
    const Point m = mercator(lon(rng), lat(rng));
    g.anchor = {m.x * scales.projection_scale, -m.y * scales.projection_scale};
    out.push_back(g);
  }
  return out;
}

std::string layout_json(const glyph::LayoutResult& r) {
  json j = json::array();
  for (const auto& g : r.glyphs) j.push_back({{"fips", g.fips}, {"x", g.position.x}, {"y", g.position.y}});
  return j.dump();
}

Outcome glyph_layout() {
  Check c;
  const auto glyphs = national_glyphs();
  const auto t0 = std::chrono::steady_clock::now();
  const auto first = glyph::resolve_overlaps(glyphs);
  const double elapsed = seconds_since(t0);
  const auto second = glyph::resolve_overlaps(glyphs);

  double worst = 0.0;
  const auto& g = first.glyphs;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) worst = std::max(worst, oracle_penetration(g[i], g[j]));
  }
  c.require(first.converged, "not converged");
  c.require(worst <= kGlyphPenetration, "penetration " + num(worst));
  c.require(layout_json(first) == layout_json(second), "runs differ");
  c.require(elapsed < kGlyphSeconds, "too slow");
  return c.outcome(std::to_string(g.size()) + " glyphs, converged in " + std::to_string(first.iterations) +
                   " iterations, max penetration " + num(worst) + ", identical JSON, " + num(elapsed) + " s");
}

// ---------------------------------------------------------------------------

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(MOTIV_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// `motiv serve --port 0` in a child process; the bound port is read from its
// first output line.
class ServeProcess {
 public:
  explicit ServeProcess(const std::string& archive) {
    int fds[2];
    if (pipe(fds) != 0) return;
    pid_ = fork();
    if (pid_ == 0) {
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      close(fds[1]);
      execl(MOTIV_CLI, MOTIV_CLI, "serve", "--data", archive.c_str(), "--port", "0", static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    std::string line;
    char ch;
    while (read(fds[0], &ch, 1) == 1 && ch != '\n') line += ch;
    close(fds[0]);
    if (const auto colon = line.rfind(':'); colon != std::string::npos) port_ = std::atoi(line.c_str() + colon + 1);
  }
  ~ServeProcess() {
    if (pid_ > 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, nullptr, 0);
    }
  }
  int port() const { return port_; }

 private:
  pid_t pid_ = -1;
  int port_ = 0;
};

Outcome end_to_end() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / ("motiv_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string archive = (dir / "corpus.motiv").string();

  const Run ingest = run_cli("ingest --tweets " + fixture("tweets.csv") + " --counties " + fixture("counties.geojson") +
                             " --demographics " + fixture("demographics.csv") + " --covid " + fixture("covid.csv") +
                             " --out " + archive);
  c.require(ingest.code == 0, "ingest exit " + std::to_string(ingest.code));

  const json spec = {{"target", "tweets_total"},
                     {"terms", {{{"feature", "tweets_for"}, {"kind", "linear"}}, "tweets_against"}},
                     {"pvalues", true}};
  std::ofstream(dir / "spec.json") << spec.dump();

  int equal = 0, compared = 0;
  {
    ServeProcess server(archive);
    c.require(server.port() > 0, "server did not start");
    httplib::Client http("127.0.0.1", server.port());
    auto get = [&](const std::string& path) {
      const auto r = http.Get(path);
      c.require(r && r->status == 200, "GET " + path);
      return r ? r->body : std::string();
    };
    get("/api/summary");
    const std::string timeline = get("/api/timeline?frame=Care");
    const std::string map = get("/api/map");
    const std::string map_pop = get("/api/map?frame=Harm&color=population");
    const auto gam = http.Post("/api/gam", spec.dump(), "application/json");
    c.require(gam && gam->status == 200, "POST /api/gam");

    auto same = [&](const Run& r, const fs::path& file, const std::string& body, const std::string& what) {
      ++compared;
      const bool ok = r.code == 0 && slurp(file) == body;
      equal += ok ? 1 : 0;
      c.require(ok, what + " differs from the API");
    };
    same(run_cli("export --data " + archive + " --panel timeline --frame Care --out " + (dir / "t.json").string()),
         dir / "t.json", timeline, "timeline export");
    same(run_cli("export --data " + archive + " --panel map --out " + (dir / "m.json").string()), dir / "m.json", map,
         "map export");
    same(run_cli("export --data " + archive + " --panel map --frame Harm --color population --out " +
                 (dir / "mp.json").string()),
         dir / "mp.json", map_pop, "map export (Harm, population)");
    same(run_cli("fit --data " + archive + " --spec " + (dir / "spec.json").string() + " --out " +
                 (dir / "fit.json").string()),
         dir / "fit.json", gam ? gam->body : "", "fit report");
  }
  fs::remove_all(dir);
  const double elapsed = seconds_since(t0);
  c.require(elapsed < kEndToEndSeconds, "too slow");
  return c.outcome("CLI vs API bitwise " + std::to_string(equal) + "/" + std::to_string(compared) + ", " +
                   num(elapsed) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geo-assignment exactness", geo_assignment}, {"GAM correctness", gam_correctness},
      {"sentiment thresholds", sentiment_thresholds}, {"timeline layout", timeline_layout},
      {"glyph layout", glyph_layout},               {"end-to-end", end_to_end}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
