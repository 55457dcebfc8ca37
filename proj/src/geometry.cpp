#include "carvelab/geometry.hpp"

#include <sstream>

#include "carvelab/error.hpp"

namespace carvelab {

Box Box::cube(std::size_t d, const Rational& half) {
  Box b;
  b.lo.assign(d, -half);
  b.hi.assign(d, half);
  return b;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw DegenerateBox("box must have matching nonempty bounds");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw DegenerateBox("box has empty extent along axis " + std::to_string(i));
}

Box parse_box(const std::string& text) {
  std::vector<Rational> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(parse_rational(item));
    } catch (const Error&) {
      throw DegenerateBox("malformed box coordinate '" + item + "'");
    }
  }
  if (values.empty() || values.size() % 2 != 0)
    throw DegenerateBox("box needs lo,hi pairs per axis");
  Box b;
  for (std::size_t i = 0; i < values.size(); i += 2) {
    b.lo.push_back(values[i]);
    b.hi.push_back(values[i + 1]);
  }
  b.validate();
  return b;
}

Polygon box_polygon(const Box& box) {
  if (box.dim() != 2) throw DegenerateBox("polygon boxes are two-dimensional");
  box.validate();
  return {{box.lo[0], box.lo[1]}, {box.hi[0], box.lo[1]}, {box.hi[0], box.hi[1]}, {box.lo[0], box.hi[1]}};
}

Rational doubled_area(const Polygon& poly) {
  Rational s = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return s;
}

Rational area(const Polygon& poly) { return doubled_area(poly) / 2; }

Point2 vertex_centroid(const Polygon& poly) {
  Point2 c{0, 0};
  for (const auto& p : poly) {
    c.x += p.x;
    c.y += p.y;
  }
  const Rational n(static_cast<long>(poly.size()));
  c.x /= n;
  c.y /= n;
  return c;
}

namespace {

void push_unique(Polygon& out, const Point2& p) {
  if (out.empty() || !(out.back() == p)) out.push_back(p);
}

Polygon finish(Polygon poly) {
  while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
  if (poly.size() < 3 || doubled_area(poly) == 0) return {};
  return poly;
}

}  // namespace

PolygonSplit split_polygon(const Polygon& poly, const Rational& a, const Rational& b, const Rational& c) {
  const std::size_t n = poly.size();
  std::vector<Rational> s(n);
  bool any_pos = false, any_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = a * poly[i].x + b * poly[i].y + c;
    any_pos = any_pos || s[i] > 0;
    any_neg = any_neg || s[i] < 0;
  }
  PolygonSplit out;
  if (!any_neg) {
    out.positive = poly;
    return out;
  }
  if (!any_pos) {
    out.negative = poly;
    return out;
  }
  std::vector<Point2> crossings;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (s[i] >= 0) push_unique(out.positive, poly[i]);
    if (s[i] <= 0) push_unique(out.negative, poly[i]);
    if (s[i] == 0) crossings.push_back(poly[i]);
    if ((s[i] > 0 && s[j] < 0) || (s[i] < 0 && s[j] > 0)) {
      const Rational t = s[i] / (s[i] - s[j]);
      Point2 p{poly[i].x + t * (poly[j].x - poly[i].x), poly[i].y + t * (poly[j].y - poly[i].y)};
      push_unique(out.positive, p);
      push_unique(out.negative, p);
      crossings.push_back(std::move(p));
    }
  }
  out.positive = finish(std::move(out.positive));
  out.negative = finish(std::move(out.negative));
  if (crossings.size() >= 2) {
    out.chord_from = crossings.front();
    out.chord_to = crossings.back();
  }
  return out;
}

bool strictly_inside(const Polygon& poly, const Point2& p) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = poly[i];
    const auto& v = poly[(i + 1) % n];
    const Rational cross = (v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x);
    if (cross <= 0) return false;
  }
  return true;
}

Line2 line_through(const Point2& p, const Point2& q) {
  Rational a = q.y - p.y;
  Rational b = p.x - q.x;
  Rational c = -(a * p.x + b * p.y);
  const Rational lead = a != 0 ? a : b;
  return {a / lead, b / lead, c / lead};
}

}  // namespace carvelab
