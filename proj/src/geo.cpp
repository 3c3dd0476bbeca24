#include "motiv/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "motiv/errors.hpp"

namespace motiv {

namespace {

// Vertex count of a closed ring without its repeated endpoint.
std::size_t open_size(std::span<const Point> ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) return ring.size() - 1;
  return ring.size();
}

enum class Edge { kLeft, kRight, kBottom, kTop };

bool inside(Point p, Edge e, const BBox& r) {
  switch (e) {
    case Edge::kLeft: return p.x >= r.min_x;
    case Edge::kRight: return p.x <= r.max_x;
    case Edge::kBottom: return p.y >= r.min_y;
    case Edge::kTop: return p.y <= r.max_y;
  }
  return false;
}

Point intersect(Point a, Point b, Edge e, const BBox& r) {
  switch (e) {
    case Edge::kLeft:
    case Edge::kRight: {
      const double x = e == Edge::kLeft ? r.min_x : r.max_x;
      const double t = (x - a.x) / (b.x - a.x);
      return {x, a.y + t * (b.y - a.y)};
    }
    case Edge::kBottom:
    case Edge::kTop: {
      const double y = e == Edge::kBottom ? r.min_y : r.max_y;
      const double t = (y - a.y) / (b.y - a.y);
      return {a.x + t * (b.x - a.x), y};
    }
  }
  return a;
}

std::vector<Point> clip_edge(const std::vector<Point>& in, Edge e, const BBox& r) {
  std::vector<Point> out;
  if (in.empty()) return out;
  out.reserve(in.size() + 4);
  Point prev = in.back();
  bool prev_in = inside(prev, e, r);
  for (const Point& cur : in) {
    const bool cur_in = inside(cur, e, r);
    if (cur_in) {
      if (!prev_in) out.push_back(intersect(prev, cur, e, r));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(intersect(prev, cur, e, r));
    }
    prev = cur;
    prev_in = cur_in;
  }
  return out;
}

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point p, Point a, Point b) {
  if (cross(a, b, p) != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_cross(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

}  // namespace

BBox bounds_of(std::span<const Point> pts) {
  BBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

BBox bounds_of(std::span<const Polygon> polys) {
  BBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Polygon& poly : polys) {
    const BBox r = bounds_of(poly.outer);
    b.min_x = std::min(b.min_x, r.min_x);
    b.min_y = std::min(b.min_y, r.min_y);
    b.max_x = std::max(b.max_x, r.max_x);
    b.max_y = std::max(b.max_y, r.max_y);
  }
  return b;
}

double signed_ring_area(std::span<const Point> ring) {
  const std::size_t n = open_size(ring);
  if (n < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    sum += a.x * b.y - b.x * a.y;
  }
  return 0.5 * sum;
}

double ring_area(std::span<const Point> ring) { return std::abs(signed_ring_area(ring)); }

double polygon_area(const Polygon& poly) {
  double a = ring_area(poly.outer);
  for (const Ring& h : poly.holes) a -= ring_area(h);
  return a;
}

double polygon_area(std::span<const Polygon> polys) {
  double a = 0.0;
  for (const Polygon& p : polys) a += polygon_area(p);
  return a;
}

bool ring_self_intersects(std::span<const Point> ring) {
  const std::size_t n = open_size(ring);
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing vertex
      if (segments_cross(a, b, ring[j], ring[(j + 1) % n])) return true;
    }
  }
  return false;
}

Ring clip_ring_to_rect(std::span<const Point> ring, const BBox& rect) {
  std::vector<Point> pts(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(open_size(ring)));
  for (Edge e : {Edge::kLeft, Edge::kRight, Edge::kBottom, Edge::kTop}) {
    pts = clip_edge(pts, e, rect);
    if (pts.empty()) return {};
  }
  pts.push_back(pts.front());
  return pts;
}

bool point_in_ring(std::span<const Point> ring, Point p) {
  const std::size_t n = open_size(ring);
  if (n < 3) return false;
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[i];
    const Point b = ring[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

bool point_in_polygon(const Polygon& poly, Point p) {
  if (!point_in_ring(poly.outer, p)) return false;
  for (const Ring& h : poly.holes) {
    // A point on a hole's boundary still belongs to the polygon.
    if (point_in_ring(h, p)) {
      bool on_edge = false;
      const std::size_t n = open_size(h);
      for (std::size_t i = 0; i < n && !on_edge; ++i) on_edge = on_segment(p, h[i], h[(i + 1) % n]);
      if (!on_edge) return false;
    }
  }
  return true;
}

bool point_in_polygons(std::span<const Polygon> polys, Point p) {
  return std::any_of(polys.begin(), polys.end(), [&](const Polygon& poly) { return point_in_polygon(poly, p); });
}

double overlap_area(std::span<const Polygon> polys, const BBox& rect) {
  double area = 0.0;
  for (const Polygon& poly : polys) {
    area += ring_area(clip_ring_to_rect(poly.outer, rect));
    for (const Ring& h : poly.holes) area -= ring_area(clip_ring_to_rect(h, rect));
  }
  return std::max(area, 0.0);
}

std::vector<OverlapResult> overlap_fractions(const BBox& bbox, std::span<const CountyShape> counties) {
  std::vector<OverlapResult> out;
  if (bbox.degenerate()) {
    const Point center{0.5 * (bbox.min_x + bbox.max_x), 0.5 * (bbox.min_y + bbox.max_y)};
    const BBox probe{center.x, center.y, center.x, center.y};
    for (const CountyShape& c : counties) {
      if (!c.bounds.intersects(probe)) continue;
      if (point_in_polygons(c.polygons, center)) out.push_back({c.fips, 1.0});
    }
  } else {
    const double area = bbox.area();
    for (const CountyShape& c : counties) {
      if (!c.bounds.intersects(bbox)) continue;
      const double a = overlap_area(c.polygons, bbox);
      if (a > 0.0) out.push_back({c.fips, std::min(a / area, 1.0)});
    }
  }
  std::sort(out.begin(), out.end(), [](const OverlapResult& a, const OverlapResult& b) { return a.fips < b.fips; });
  return out;
}

std::optional<Assignment> assign_county(const BBox& bbox, std::span<const CountyShape> counties, double threshold) {
  // Fractions closer than this are ties; the smaller FIPS wins.
  constexpr double kTieTolerance = 1e-12;
  const std::vector<OverlapResult> fractions = overlap_fractions(bbox, counties);
  const OverlapResult* best = nullptr;
  for (const OverlapResult& r : fractions) {
    if (best == nullptr || r.overlap_fraction > best->overlap_fraction + kTieTolerance) best = &r;
  }
  if (best == nullptr || best->overlap_fraction < threshold) return std::nullopt;
  return Assignment{best->fips, best->overlap_fraction};
}

Point mercator(double lon_deg, double lat_deg) {
  if (!std::isfinite(lon_deg) || !std::isfinite(lat_deg) || std::abs(lat_deg) >= kMaxMercatorLatitude) {
    throw InputError("latitude " + std::to_string(lat_deg) + " outside Mercator range");
  }
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double lambda = lon_deg * kDeg;
  const double phi = lat_deg * kDeg;
  return {lambda, std::log(std::tan(std::numbers::pi / 4.0 + phi / 2.0))};
}

std::optional<Point> ring_centroid(std::span<const Point> ring) {
  const std::size_t n = open_size(ring);
  if (n < 3) return std::nullopt;
  // Shift to the first vertex to limit cancellation on large coordinates.
  const Point o = ring[0];
  double a2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = ring[i].x - o.x;
    const double y0 = ring[i].y - o.y;
    const double x1 = ring[(i + 1) % n].x - o.x;
    const double y1 = ring[(i + 1) % n].y - o.y;
    const double c = x0 * y1 - x1 * y0;
    a2 += c;
    cx += (x0 + x1) * c;
    cy += (y0 + y1) * c;
  }
  if (a2 == 0.0) return std::nullopt;
  return Point{o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

Anchor county_anchor(std::span<const Polygon> polygons) {
  const Polygon* largest = nullptr;
  double best = 0.0;
  for (const Polygon& p : polygons) {
    const double a = ring_area(p.outer);
    if (largest == nullptr || a > best) {
      largest = &p;
      best = a;
    }
  }
  if (largest != nullptr && best > 0.0) {
    if (auto c = ring_centroid(largest->outer)) return {mercator(c->x, c->y), false};
  }
  const BBox b = bounds_of(polygons);
  if (!std::isfinite(b.min_x)) throw InputError("county has no geometry");
  return {mercator(0.5 * (b.min_x + b.max_x), 0.5 * (b.min_y + b.max_y)), true};
}

}  // namespace motiv
