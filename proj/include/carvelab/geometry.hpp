#pragma once

#include <cstddef>
#include <vector>

#include "carvelab/rational.hpp"

namespace carvelab {

/// Axis-aligned box lo < x < hi in d dimensions.
struct Box {
  std::vector<Rational> lo;
  std::vector<Rational> hi;

  std::size_t dim() const { return lo.size(); }
  /// [-half, half]^d.
  static Box cube(std::size_t d, const Rational& half);
  /// Throws DegenerateBox unless lo < hi in every coordinate.
  void validate() const;
};

/// Parses "x0,x1,y0,y1,..." into a box; throws DegenerateBox on bad input.
Box parse_box(const std::string& text);

struct Point2 {
  Rational x;
  Rational y;
  bool operator==(const Point2&) const = default;
};

/// Convex polygon, vertices in counter-clockwise order, no repeated vertex.
using Polygon = std::vector<Point2>;

Polygon box_polygon(const Box& box);

/// Twice the signed area (positive for CCW order).
Rational doubled_area(const Polygon& poly);
Rational area(const Polygon& poly);

/// Vertex average; strictly interior for a convex polygon with area > 0.
Point2 vertex_centroid(const Polygon& poly);

/// Result of cutting a convex polygon by the line a*x + b*y + c = 0.
/// A half with zero area is returned empty.
struct PolygonSplit {
  Polygon positive;  ///< part where a*x + b*y + c >= 0
  Polygon negative;  ///< part where a*x + b*y + c <= 0
  /// Chord of the cut inside the polygon; valid when both halves are nonempty.
  Point2 chord_from;
  Point2 chord_to;
};

PolygonSplit split_polygon(const Polygon& poly, const Rational& a, const Rational& b,
                           const Rational& c);

/// True when p lies in the open interior of the convex polygon.
bool strictly_inside(const Polygon& poly, const Point2& p);

/// Line through two distinct points, normalised so the first nonzero of (a, b)
/// equals 1. Equal lines produce equal triples.
struct Line2 {
  Rational a, b, c;
  bool operator==(const Line2&) const = default;
  auto operator<=>(const Line2& o) const {
    if (auto r = compare(a, o.a); r != 0) return r;
    if (auto r = compare(b, o.b); r != 0) return r;
    return compare(c, o.c);
  }

 private:
  static std::strong_ordering compare(const Rational& u, const Rational& v) {
    if (u < v) return std::strong_ordering::less;
    if (v < u) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
};

Line2 line_through(const Point2& p, const Point2& q);

}  // namespace carvelab
