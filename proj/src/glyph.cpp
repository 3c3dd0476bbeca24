#include "motiv/glyph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "motiv/errors.hpp"
#include "motiv/numeric.hpp"

namespace motiv::glyph {

namespace {

double scaled(double v, SizeScale s) { return s == SizeScale::kSqrt ? std::sqrt(v) : v; }

}  // namespace

Extents compute_extents(const analytics::FeatureTable& features, std::optional<MoralFrame> frame) {
  Extents e;
  bool have_pop = false;
  for (const auto& [fips, county] : features.dataset().counties()) {
    if (const auto& pop = county.demographics.population) {
      const double p = static_cast<double>(*pop);
      e.min_population = have_pop ? std::min(e.min_population, p) : p;
      e.max_population = have_pop ? std::max(e.max_population, p) : p;
      have_pop = true;
    }
    const auto& agg = features.aggregate(fips);
    e.max_count = std::max({e.max_count, static_cast<double>(agg.count(frame, Stance::kFor)),
                            static_cast<double>(agg.count(frame, Stance::kAgainst))});
  }
  return e;
}

Glyph glyph_shape(const County& county, const analytics::CountyAggregate& aggregate, std::optional<MoralFrame> frame,
                  const Extents& extents, const Scales& scales) {
  Glyph g;
  g.fips = county.fips;

  const double lo = scaled(extents.min_population, scales.scale);
  const double hi = scaled(extents.max_population, scales.scale);
  if (const auto& pop = county.demographics.population) {
    const double v = scaled(static_cast<double>(*pop), scales.scale);
    const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 1.0;
    g.half_width = 0.5 * (scales.w_min + t * (scales.w_max - scales.w_min));
  } else {
    g.half_width = 0.5 * scales.w_min;
  }

  auto radius = [&](Stance s) {
    const double c = static_cast<double>(aggregate.count(frame, s));
    if (c <= 0.0 || extents.max_count <= 0.0) return scales.zero_radius;
    return scales.r_max * std::min(1.0, scaled(c, scales.scale) / scaled(extents.max_count, scales.scale));
  };
  g.upper_radius = radius(Stance::kFor);
  g.lower_radius = radius(Stance::kAgainst);
  return g;
}

double penetration(const Glyph& a, const Glyph& b) {
  const double dx = b.position.x - a.position.x;
  const double dy = b.position.y - a.position.y;
  const double sx = a.semi_x() + b.semi_x();
  const double sy = a.semi_y() + b.semi_y();
  if (sx <= 0.0 || sy <= 0.0) return 0.0;
  const double s = (dx / sx) * (dx / sx) + (dy / sy) * (dy / sy);
  if (s >= 1.0) return 0.0;
  const double d = std::hypot(dx, dy);
  if (s == 0.0) return sx;  // coincident: separate horizontally
  return d / std::sqrt(s) - d;
}

namespace {

// Pairs (i < j) whose bounding boxes, grown by margin, overlap; lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const std::vector<Glyph>& g, double margin = 0.0) {
  std::vector<std::size_t> order(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto left = [&](std::size_t i) { return g[i].position.x - g[i].semi_x(); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return left(a) != left(b) ? left(a) < left(b) : a < b;
  });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Glyph& a = g[order[k]];
    const double right = a.position.x + a.semi_x() + margin;
    for (std::size_t m = k + 1; m < order.size() && left(order[m]) < right; ++m) {
      const Glyph& b = g[order[m]];
      if (std::abs(b.position.y - a.position.y) < a.semi_y() + b.semi_y() + margin) {
        pairs.emplace_back(std::min(order[k], order[m]), std::max(order[k], order[m]));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

void push_apart(Glyph& a, Glyph& b) {
  const double depth = penetration(a, b);
  if (depth <= 0.0) return;
  double dx = b.position.x - a.position.x;
  double dy = b.position.y - a.position.y;
  const double d = std::hypot(dx, dy);
  if (d == 0.0) {
    dx = 1.0;
    dy = 0.0;
  } else {
    dx /= d;
    dy /= d;
  }
  const double half = 0.5 * depth;
  a.position.x -= half * dx;
  a.position.y -= half * dy;
  b.position.x += half * dx;
  b.position.y += half * dy;
}

}  // namespace

LayoutResult resolve_overlaps(std::vector<Glyph> glyphs, const LayoutOptions& options) {
  std::sort(glyphs.begin(), glyphs.end(), [](const Glyph& a, const Glyph& b) { return a.fips < b.fips; });
  for (Glyph& g : glyphs) g.position = g.anchor;

  // Coincident anchors: offset the k-th glyph (FIPS order) of each group by k steps.
  {
    std::vector<std::size_t> idx(glyphs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const Point& pa = glyphs[a].anchor;
      const Point& pb = glyphs[b].anchor;
      return pa.x != pb.x ? pa.x < pb.x : pa.y < pb.y;
    });
    std::size_t rank = 0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      rank = glyphs[idx[k]].anchor == glyphs[idx[k - 1]].anchor ? rank + 1 : 0;
      glyphs[idx[k]].position.x += options.coincident_step * static_cast<double>(rank);
    }
  }

  LayoutResult result;
  std::vector<Point> before(glyphs.size());
  std::vector<Point> built(glyphs.size());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  constexpr double kMargin = 5.0;
  auto rebuild = [&] {
    pairs = candidate_pairs(glyphs, kMargin);
    for (std::size_t i = 0; i < glyphs.size(); ++i) built[i] = glyphs[i].position;
  };
  // Pairs stay valid while no glyph has drifted more than half the margin.
  auto refresh = [&] {
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
      if (std::abs(glyphs[i].position.x - built[i].x) > 0.5 * kMargin ||
          std::abs(glyphs[i].position.y - built[i].y) > 0.5 * kMargin) {
        rebuild();
        return;
      }
    }
  };
  auto worst_penetration = [&] {
    refresh();
    double worst = 0.0;
    for (const auto& [i, j] : pairs) worst = std::max(worst, penetration(glyphs[i], glyphs[j]));
    return worst;
  };
  rebuild();

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (std::size_t i = 0; i < glyphs.size(); ++i) before[i] = glyphs[i].position;
    for (Glyph& g : glyphs) {
      g.position.x += options.spring * (g.anchor.x - g.position.x);
      g.position.y += options.spring * (g.anchor.y - g.position.y);
    }
    for (int pass = 0; pass < options.collision_passes; ++pass) {
      refresh();
      double worst = 0.0;
      for (const auto& [i, j] : pairs) {
        worst = std::max(worst, penetration(glyphs[i], glyphs[j]));
        push_apart(glyphs[i], glyphs[j]);
      }
      if (worst <= 0.25 * options.tolerance) break;
    }

    double max_disp = 0.0;
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
      max_disp = std::max(max_disp, std::hypot(glyphs[i].position.x - before[i].x, glyphs[i].position.y - before[i].y));
    }
    result.iterations = iter + 1;
    if (max_disp < options.tolerance && worst_penetration() <= options.tolerance) {
      result.converged = true;
      break;
    }
  }

  for (const auto& [i, j] : candidate_pairs(glyphs)) {
    result.max_penetration = std::max(result.max_penetration, penetration(glyphs[i], glyphs[j]));
  }
  for (const Glyph& g : glyphs) {
    result.total_displacement += std::hypot(g.position.x - g.anchor.x, g.position.y - g.anchor.y);
  }
  result.glyphs = std::move(glyphs);
  return result;
}

LayoutResult layout_map(const analytics::FeatureTable& features, std::optional<MoralFrame> frame,
                        const std::string& color_feature, const Scales& scales, const LayoutOptions& options) {
  using analytics::FeatureTable;
  if (!FeatureTable::is_county_feature(color_feature)) {
    std::string valid;
    for (const auto& n : FeatureTable::county_feature_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InputError("unknown color feature '" + color_feature + "'; valid features: " + valid);
  }
  const Extents extents = compute_extents(features, frame);
  std::vector<Glyph> glyphs;
  for (const auto& [fips, county] : features.dataset().counties()) {
    const auto& agg = features.aggregate(fips);
    const bool populated = county.demographics.population && *county.demographics.population > 0;
    if (agg.total_tweets == 0 && !populated) continue;
    Glyph g = glyph_shape(county, agg, frame, extents, scales);
    const Anchor a = county_anchor(county.polygons);
    g.anchor = {a.position.x * scales.projection_scale, -a.position.y * scales.projection_scale};
    g.anchor_fallback = a.fallback;
    g.color_value = features.county_value(county, color_feature);
    glyphs.push_back(std::move(g));
  }
  return resolve_overlaps(std::move(glyphs), options);
}

std::vector<Point> outline(const Glyph& g, int segments_per_half) {
  std::vector<Point> pts;
  const Point c = g.position;
  // Screen coordinates: y grows downward, so the upper half has y < c.y.
  for (int i = 0; i <= segments_per_half; ++i) {
    const double t = std::numbers::pi * i / segments_per_half;
    pts.push_back({c.x + g.half_width * std::cos(t), c.y - g.upper_radius * std::sin(t)});
  }
  for (int i = 1; i < segments_per_half; ++i) {
    const double t = std::numbers::pi + std::numbers::pi * i / segments_per_half;
    pts.push_back({c.x + g.half_width * std::cos(t), c.y - g.lower_radius * std::sin(t)});
  }
  pts.push_back(pts.front());
  return pts;
}

std::string render_svg(std::span<const Glyph> glyphs) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  double min_x = 0, min_y = 0, max_x = 1, max_y = 1;
  bool first = true;
  double cmin = 0, cmax = 0;
  bool have_color = false;
  for (const Glyph& g : glyphs) {
    const double l = g.position.x - g.half_width, r = g.position.x + g.half_width;
    const double t = g.position.y - g.upper_radius, b = g.position.y + g.lower_radius;
    if (first) {
      min_x = l, max_x = r, min_y = t, max_y = b;
      first = false;
    } else {
      min_x = std::min(min_x, l), max_x = std::max(max_x, r);
      min_y = std::min(min_y, t), max_y = std::max(max_y, b);
    }
    if (g.color_value) {
      cmin = have_color ? std::min(cmin, *g.color_value) : *g.color_value;
      cmax = have_color ? std::max(cmax, *g.color_value) : *g.color_value;
      have_color = true;
    }
  }
  const double pad = 5.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(min_x - pad) + " " +
                    num(min_y - pad) + " " + num(max_x - min_x + 2 * pad) + " " + num(max_y - min_y + 2 * pad) +
                    "\">\n";
  for (const Glyph& g : glyphs) {
    std::string fill = "#bbbbbb";
    if (g.color_value && cmax > cmin) {
      // Red (low) to blue (high).
      const double t = (*g.color_value - cmin) / (cmax - cmin);
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(215 * (1 - t) + 33 * t)),
                    static_cast<int>(std::lround(48 * (1 - t) + 102 * t)),
                    static_cast<int>(std::lround(39 * (1 - t) + 172 * t)));
      fill = buf;
    }
    svg += "  <path data-fips=\"" + g.fips + "\" fill=\"" + fill + "\" stroke=\"#333333\" stroke-width=\"0.3\" d=\"";
    const auto pts = outline(g);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      svg += (i == 0 ? "M" : " L") + num(pts[i].x) + " " + num(pts[i].y);
    }
    svg += " Z\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace motiv::glyph
