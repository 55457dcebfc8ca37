#include <doctest.h>

#include <cmath>

#include "carvelab/error.hpp"
#include "carvelab/satlab.hpp"

using namespace carvelab;

TEST_CASE("small hand formulas") {
  // (x1 v x2 v -x3) ^ (-x1 v x4 v x5) ^ (x2 v x3 v -x5)
  const CnfFormula f{5, {{1, 2, -3}, {-1, 4, 5}, {2, 3, -5}}};
  CHECK(f.alpha() == doctest::Approx(0.6));
  const std::vector<bool> all_true(6, true);
  CHECK(satisfies(f, all_true));
  const auto r = dpll_solve(f);
  CHECK(r.status == SatStatus::Sat);
  CHECK(satisfies(f, r.assignment));

  const CnfFormula empty{4, {}};
  CHECK(dpll_solve(empty).status == SatStatus::Sat);

  const CnfFormula contradiction{1, {{1}, {-1}}};
  CHECK(dpll_solve(contradiction).status == SatStatus::Unsat);
  CHECK_FALSE(brute_force_satisfiable(contradiction));
  CHECK(status_name(SatStatus::Unsat) == "UNSAT");
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(CnfFormula{3, {{1, 4}}}), InvalidSize);
  CHECK_THROWS_AS(validate(CnfFormula{3, {{0, 1}}}), InvalidSize);
  CHECK_THROWS_AS(validate(CnfFormula{3, {{}}}), InvalidSize);
  Rng rng(1, 0);
  CHECK_THROWS_AS(random_3sat(2, 4, rng), InvalidSize);
}

TEST_CASE("random clauses have three distinct variables") {
  Rng rng(2, 0);
  const auto f = random_3sat(10, 200, rng);
  CHECK(f.clauses.size() == 200);
  std::size_t negated = 0;
  for (const auto& c : f.clauses) {
    REQUIRE(c.size() == 3);
    CHECK(std::abs(c[0]) != std::abs(c[1]));
    CHECK(std::abs(c[0]) != std::abs(c[2]));
    CHECK(std::abs(c[1]) != std::abs(c[2]));
    for (int l : c) negated += l < 0;
  }
  CHECK(negated > 240);
  CHECK(negated < 360);
}

TEST_CASE("DPLL agrees with brute force") {
  Rng rng(3, 0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 3 + t % 13;
    const std::size_t m = static_cast<std::size_t>(std::lround((2.0 + (t % 7)) * static_cast<double>(n)));
    auto sub = rng.substream(t);
    const auto f = random_3sat(n, m, sub);
    const auto r = dpll_solve(f);
    REQUIRE(r.status != SatStatus::Timeout);
    CHECK((r.status == SatStatus::Sat) == brute_force_satisfiable(f));
    if (r.status == SatStatus::Sat) CHECK(satisfies(f, r.assignment));
  }
}

TEST_CASE("DIMACS round trip") {
  Rng rng(4, 0);
  const auto f = random_3sat(12, 40, rng);
  const auto text = to_dimacs(f);
  CHECK(text.rfind("p cnf 12 40", 0) == 0);
  const auto g = parse_dimacs(text);
  CHECK(g.n == f.n);
  CHECK(g.clauses == f.clauses);
  const auto h = parse_dimacs("c comment\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n");
  CHECK(h.clauses == std::vector<std::vector<int>>{{1, -2}, {2, 3, -1}});
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), ParseError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 5 0\n"), ParseError);
}

TEST_CASE("sweeps are deterministic and decreasing at the ends") {
  const std::vector<double> alphas{1.0, 4.3, 8.0};
  const auto a = phase_sweep(20, alphas, 40, 9);
  const auto b = phase_sweep(20, alphas, 40, 9);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].sat == b[i].sat);
    CHECK(a[i].median_nodes == b[i].median_nodes);
    CHECK(a[i].m == static_cast<std::size_t>(std::lround(alphas[i] * 20)));
  }
  CHECK(a[0].fraction > 0.9);
  CHECK(a[2].fraction < 0.1);
  const double x = crossing_alpha(a);
  CHECK(x > 1.0);
  CHECK(x < 8.0);
  std::vector<SweepRow> flat{{1, 1, 1, 0, 0, 1.0, 0}, {2, 2, 1, 0, 0, 1.0, 0}};
  CHECK(std::isnan(crossing_alpha(flat)));
}
