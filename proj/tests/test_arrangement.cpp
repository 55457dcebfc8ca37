#include <doctest.h>

#include <set>

#include "carvelab/arrangement.hpp"
#include "carvelab/error.hpp"
#include "carvelab/rng.hpp"

using namespace carvelab;

namespace {

Hyperplane line(long a, long b, long c) { return {{Rational(a), Rational(b)}, Rational(c)}; }

// Brute force: binomial partial sum written out term by term in doubles.
double binomial_sum(unsigned n, unsigned d) {
  double total = 0, c = 1;
  for (unsigned k = 0; k <= std::min(n, d); ++k) {
    total += c;
    c = c * (n - k) / (k + 1);
  }
  return total;
}

}  // namespace

TEST_CASE("region count formula") {
  CHECK(region_count_formula(3, 2) == 7);
  CHECK(region_count_formula(2, 2) == 4);
  CHECK(region_count_formula(1, 2) == 2);
  for (unsigned d = 1; d < 6; ++d) CHECK(region_count_formula(0, d) == 1);
  for (unsigned n = 0; n < 20; ++n)
    for (unsigned d = 1; d < 8; ++d) CHECK(region_count_formula(n, d).convert_to<double>() == binomial_sum(n, d));
  // n <= d: every sign vector is realised.
  CHECK(region_count_formula(5, 7) == 32);
  // Large values stay exact.
  CHECK(region_count_formula(200, 100).str().size() > 50);
}

TEST_CASE("layerwise bound") {
  const std::vector<std::size_t> a{3, 1}, b{3, 2}, c{6};
  CHECK(layerwise_upper_bound(a, 2) == 14);
  CHECK(layerwise_upper_bound(b, 2) == 28);
  CHECK(layerwise_upper_bound(c, 1) == 7);
}

TEST_CASE("three generic lines make seven regions") {
  const std::vector<Hyperplane> planes{line(1, 0, 0), line(0, 1, 0), line(1, 1, -1)};
  CHECK(in_general_position(planes));
  CHECK(enumerate_regions(planes, default_arrangement_box(2)).size() == 7);
  const auto cells = enumerate_cells(planes, enclosing_box(planes, 2));
  CHECK(cells.size() == 7);
  for (const auto& cell : cells) {
    REQUIRE(cell.polygon.size() >= 3);
    for (std::size_t k = 0; k < planes.size(); ++k) {
      const Rational v = planes[k].normal[0] * cell.interior_point[0] + planes[k].normal[1] * cell.interior_point[1] +
                         planes[k].offset;
      CHECK((v > 0) == (cell.signs.signs[k] == Side::Positive));
      CHECK(v != 0);
    }
  }
}

TEST_CASE("parallel lines are not in general position") {
  const std::vector<Hyperplane> planes{line(1, 0, 0), line(2, 0, -1)};
  CHECK_FALSE(in_general_position(planes));
  CHECK(enumerate_regions(planes, default_arrangement_box(2)).size() == 3);
  const std::vector<Hyperplane> concurrent{line(1, 0, 0), line(0, 1, 0), line(1, 1, 0)};
  CHECK_FALSE(in_general_position(concurrent));
  CHECK(enumerate_regions(concurrent, default_arrangement_box(2)).size() == 6);
}

TEST_CASE("enumeration matches grid sampling") {
  Rng rng(21, 0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Hyperplane> planes;
    for (int k = 0; k < 4; ++k)
      planes.push_back({{Rational(static_cast<long>(rng() % 19) - 9, 4), Rational(static_cast<long>(rng() % 19) - 9, 3)},
                        Rational(static_cast<long>(rng() % 13) - 6, 5)});
    const Box box = Box::cube(2, Rational(2));
    const auto exact = enumerate_regions(planes, box);
    std::set<std::vector<int>> seen;
    const int g = 2000;
    std::vector<double> a, b, c;
    for (const auto& h : planes) {
      a.push_back(to_double(h.normal[0]));
      b.push_back(to_double(h.normal[1]));
      c.push_back(to_double(h.offset));
    }
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const double x = -2 + 4 * (i + 0.5) / g, y = -2 + 4 * (j + 0.5) / g;
        std::vector<int> s(planes.size());
        bool on = false;
        for (std::size_t k = 0; k < planes.size(); ++k) {
          const double v = a[k] * x + b[k] * y + c[k];
          on |= v == 0;
          s[k] = v > 0 ? 1 : -1;
        }
        if (!on) seen.insert(s);
      }
    std::set<std::vector<int>> exact_set;
    for (const auto& sv : exact) {
      std::vector<int> s;
      for (auto side : sv.signs) s.push_back(side == Side::Positive ? 1 : -1);
      exact_set.insert(s);
    }
    CHECK(seen == exact_set);
  }
}

TEST_CASE("three dimensional arrangements") {
  Rng rng(8, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Hyperplane> planes;
    for (int k = 0; k < 5; ++k) {
      Hyperplane h;
      for (int j = 0; j < 3; ++j) h.normal.push_back(Rational(static_cast<long>(rng() % 21) - 10, 3));
      h.offset = Rational(static_cast<long>(rng() % 21) - 10, 7);
      planes.push_back(h);
    }
    if (!in_general_position(planes)) continue;
    CHECK(enumerate_regions(planes, enclosing_box(planes, 3)).size() == region_count_formula(5, 3));
  }
}

TEST_CASE("sign vectors print as + and -") {
  SignVector s{{Side::Positive, Side::Negative}};
  CHECK(s.str() == "+-");
}
