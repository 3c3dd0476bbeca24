#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace motiv {

struct Point {
  double x = 0.0;  // longitude (degrees) or projected x
  double y = 0.0;  // latitude (degrees) or projected y

  bool operator==(const Point&) const = default;
};

/// Closed ring: first vertex repeated as the last one.
using Ring = std::vector<Point>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;

  bool operator==(const Polygon&) const = default;
};

struct BBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double area() const { return width() * height(); }
  bool degenerate() const { return !(width() > 0.0 && height() > 0.0); }
  bool intersects(const BBox& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }

  bool operator==(const BBox&) const = default;
};

BBox bounds_of(std::span<const Point> pts);
BBox bounds_of(std::span<const Polygon> polys);

/// Signed shoelace area (positive for counter-clockwise rings).
double signed_ring_area(std::span<const Point> ring);

/// Absolute shoelace area of a closed ring, in planar units squared.
double ring_area(std::span<const Point> ring);

/// Outer rings minus holes, summed over all polygons.
double polygon_area(const Polygon& poly);
double polygon_area(std::span<const Polygon> polys);

/// True when the ring crosses itself (validation only; area is still defined).
bool ring_self_intersects(std::span<const Point> ring);

/// Sutherland-Hodgman clip of a closed ring against an axis-aligned
/// rectangle, one half-plane at a time. Returns a closed ring, or an empty
/// ring when nothing remains.
Ring clip_ring_to_rect(std::span<const Point> ring, const BBox& rect);

/// Even-odd point-in-ring test; points on the boundary count as inside.
bool point_in_ring(std::span<const Point> ring, Point p);
bool point_in_polygon(const Polygon& poly, Point p);
bool point_in_polygons(std::span<const Polygon> polys, Point p);

/// Area of (polygons ∩ rect).
double overlap_area(std::span<const Polygon> polys, const BBox& rect);

struct CountyShape {
  std::string fips;
  std::span<const Polygon> polygons;
  BBox bounds;
};

struct Assignment {
  std::string fips;
  double overlap_fraction = 0.0;

  bool operator==(const Assignment&) const = default;
};

struct OverlapResult {
  std::string fips;
  double overlap_fraction = 0.0;
};

inline constexpr double kDefaultOverlapThreshold = 0.25;

/// Overlap fraction of a bbox with every county whose bounds intersect it,
/// ordered by FIPS. A degenerate bbox is treated as its center point and
/// gets fraction 1.0 for the containing county.
std::vector<OverlapResult> overlap_fractions(const BBox& bbox, std::span<const CountyShape> counties);

/// County with the largest overlap fraction, if that fraction reaches
/// `threshold`. Ties at the maximum go to the smaller FIPS.
std::optional<Assignment> assign_county(const BBox& bbox, std::span<const CountyShape> counties,
                                        double threshold = kDefaultOverlapThreshold);

/// Spherical Mercator with unit radius. Throws InputError when
/// |lat| >= kMaxMercatorLatitude.
inline constexpr double kMaxMercatorLatitude = 85.06;
Point mercator(double lon_deg, double lat_deg);

/// Area-weighted centroid of a ring. Returns nullopt for zero-area rings.
std::optional<Point> ring_centroid(std::span<const Point> ring);

struct Anchor {
  Point position;      // Mercator, unit radius
  bool fallback = false;  // zero-area county: bbox center was used
};

/// Centroid of the largest outer ring, projected.
Anchor county_anchor(std::span<const Polygon> polygons);

}  // namespace motiv
