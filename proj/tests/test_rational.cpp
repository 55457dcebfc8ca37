#include <doctest.h>

#include "carvelab/error.hpp"
#include "carvelab/geometry.hpp"
#include "carvelab/lp.hpp"
#include "carvelab/polynomial.hpp"
#include "carvelab/rational.hpp"
#include "carvelab/rng.hpp"

using namespace carvelab;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-6/8") == Rational(-3, 4));
  CHECK(parse_rational("7") == Rational(7));
  CHECK(parse_rational("-0.25") == Rational(-1, 4));
  CHECK(parse_rational(" 1.5 ") == Rational(3, 2));
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("abc"), ParseError);
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK(to_string(Rational(-3, 4)) == "-3/4");
  CHECK(to_string(Rational(5)) == "5");
}

TEST_CASE("doubles convert exactly") {
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_from_double(-3.0) == Rational(-3));
  const double v = 0.1;
  CHECK(to_double(rational_from_double(v)) == v);
  CHECK(rational_from_double(v) != Rational(1, 10));
  CHECK_THROWS_AS(rational_from_double(std::nan("")), ParseError);
  CHECK(bit_size(Rational(255, 2)) == 8);
}

TEST_CASE("box parsing and polygons") {
  const Box b = parse_box("-1,1,0,2");
  CHECK(b.dim() == 2);
  CHECK(b.lo[1] == 0);
  CHECK_THROWS_AS(parse_box("1,0"), DegenerateBox);
  CHECK_THROWS_AS(parse_box("1,2,3"), DegenerateBox);
  const Polygon sq = box_polygon(b);
  CHECK(area(sq) == 4);
  CHECK(doubled_area(sq) == 8);
  CHECK(strictly_inside(sq, Point2{Rational(0), Rational(1)}));
  CHECK_FALSE(strictly_inside(sq, Point2{Rational(1), Rational(1)}));
}

TEST_CASE("splitting a polygon preserves area") {
  Rng rng(3, 0);
  const Polygon sq = box_polygon(Box::cube(2, Rational(1)));
  for (int t = 0; t < 50; ++t) {
    const Rational a(static_cast<long>(rng() % 11) - 5, 3), b(static_cast<long>(rng() % 11) - 5, 2),
        c(static_cast<long>(rng() % 7) - 3, 4);
    if (a == 0 && b == 0) continue;
    const auto s = split_polygon(sq, a, b, c);
    CHECK(area(s.positive) + area(s.negative) == area(sq));
    for (const auto& p : s.positive) CHECK(a * p.x + b * p.y + c >= 0);
    for (const auto& p : s.negative) CHECK(a * p.x + b * p.y + c <= 0);
  }
}

TEST_CASE("line through two points") {
  const Line2 l = line_through({Rational(0), Rational(0)}, {Rational(2), Rational(2)});
  CHECK(l.a * 1 + l.b * 1 + l.c == 0);
  CHECK(l == line_through({Rational(2), Rational(2)}, {Rational(0), Rational(0)}));
}

TEST_CASE("simplex and max margin agree in both number types") {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6
  const std::vector<std::vector<double>> a{{1, 2}, {3, 1}};
  const auto r = simplex_maximize<double>(a, {4, 6}, {1, 1});
  CHECK(r.bounded);
  CHECK(r.objective == doctest::Approx(2.8));
  const std::vector<std::vector<Rational>> ar{{1, 2}, {3, 1}};
  const auto q = simplex_maximize<Rational>(ar, {Rational(4), Rational(6)}, {Rational(1), Rational(1)});
  CHECK(q.objective == Rational(14, 5));

  // Cell x > 0, y > 0 inside [-1,1]^2: the largest margin is 1/2 at (1/2, 1/2)
  // for unit-norm rows.
  const std::vector<std::vector<Rational>> rows{{1, 0}, {0, 1}};
  const std::vector<Rational> lo{-1, -1}, hi{1, 1};
  const auto m = max_margin<Rational>(rows, {Rational(0), Rational(0)}, lo, hi);
  CHECK(m.margin > 0);
  CHECK(m.point[0] > 0);
  CHECK(m.point[1] > 0);
  // Empty cell: x > 1 and x < -1.
  const std::vector<std::vector<Rational>> bad{{1, 0}, {-1, 0}};
  CHECK(max_margin<Rational>(bad, {Rational(-1), Rational(-1)}, lo, hi).margin <= 0);
}

TEST_CASE("polynomial arithmetic") {
  using P = Polynomial<Rational>;
  const P x = P::variable(2, 0), y = P::variable(2, 1);
  const P f = Rational(2) * x * x * x + y * y * y - x * y;
  CHECK(f.degree() == 3);
  CHECK(f.size() == 3);
  const std::vector<Rational> at{Rational(1), Rational(2)};
  CHECK(f.evaluate(at) == 2 + 8 - 2);
  const auto h = f.hessian();
  CHECK(h[0] == Rational(12) * x);
  CHECK(h[1] == P::constant(2, Rational(-1)));
  CHECK(h[2] == h[1]);
  CHECK(h[3] == Rational(6) * y);
  CHECK((f - f).is_zero());
  CHECK_THROWS_AS(x + P::variable(3, 0), DimensionMismatch);
  const auto fd = f.cast<double>([](const Rational& r) { return to_double(r); });
  const std::vector<double> atd{1.0, 2.0};
  CHECK(fd.evaluate(atd) == doctest::Approx(8.0));
}
