#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motiv/analytics.hpp"
#include "motiv/geo.hpp"

namespace motiv::glyph {

enum class SizeScale { kSqrt, kLinear };

/// Glyph size ranges in layout units.
struct Scales {
  double w_min = 4.0;
  double w_max = 40.0;
  double r_max = 30.0;
  double zero_radius = 1.0;  // radius drawn for a stance with no tweets
  SizeScale scale = SizeScale::kSqrt;
  double projection_scale = 1000.0;  // layout units per unit-radius Mercator unit
};

/// Dataset-wide extents the glyph sizes are normalized by.
struct Extents {
  double min_population = 0.0;
  double max_population = 0.0;
  double max_count = 0.0;  // largest per-stance count for the frame
};

struct Glyph {
  std::string fips;
  Point anchor;
  Point position;
  double half_width = 0.0;
  double upper_radius = 0.0;  // for
  double lower_radius = 0.0;  // against
  std::optional<double> color_value;
  bool anchor_fallback = false;

  /// Semi-axes of the circumscribing ellipse used for collision tests.
  double semi_x() const { return half_width; }
  double semi_y() const { return upper_radius > lower_radius ? upper_radius : lower_radius; }
};

Extents compute_extents(const analytics::FeatureTable& features, std::optional<MoralFrame> frame);

/// Width from population, radii from the frame's for/against counts.
Glyph glyph_shape(const County& county, const analytics::CountyAggregate& aggregate, std::optional<MoralFrame> frame,
                  const Extents& extents, const Scales& scales = {});

struct LayoutOptions {
  double spring = 0.1;
  int max_iterations = 300;
  double tolerance = 0.05;  // max displacement per iteration and residual penetration at convergence
  double coincident_step = 1e-3;
  int collision_passes = 50;  // pair sweeps per iteration, until no pair overlaps
};

struct LayoutResult {
  std::vector<Glyph> glyphs;  // FIPS order
  int iterations = 0;
  bool converged = false;
  double max_penetration = 0.0;
  double total_displacement = 0.0;  // sum of |position - anchor|
};

/// Penetration depth of two glyph ellipses along their center line, 0 when
/// they do not overlap: with s = (dx/(a1+a2))^2 + (dy/(b1+b2))^2 < 1 the
/// centers must move apart to distance d / sqrt(s).
double penetration(const Glyph& a, const Glyph& b);

/// Spring-and-push relaxation; input order is irrelevant, processing is in
/// FIPS order.
LayoutResult resolve_overlaps(std::vector<Glyph> glyphs, const LayoutOptions& options = {});

/// Glyphs for every county with at least one tweet or a positive
/// population, anchored at the projected centroid and laid out.
LayoutResult layout_map(const analytics::FeatureTable& features, std::optional<MoralFrame> frame,
                        const std::string& color_feature, const Scales& scales = {},
                        const LayoutOptions& options = {});

/// Closed outline: upper half-ellipse then lower half-ellipse.
std::vector<Point> outline(const Glyph& g, int segments_per_half = 16);

/// Standalone SVG with one <path> per glyph.
std::string render_svg(std::span<const Glyph> glyphs);

}  // namespace motiv::glyph
