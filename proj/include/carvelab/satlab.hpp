#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "carvelab/rng.hpp"

namespace carvelab {

/// CNF over variables 1..n; literal +v is x_v, -v its negation.
struct CnfFormula {
  std::size_t n = 0;
  std::vector<std::vector<int>> clauses;

  double alpha() const { return n == 0 ? 0.0 : static_cast<double>(clauses.size()) / static_cast<double>(n); }
};

/// Throws InvalidSize on a literal outside 1..n or an empty clause list
/// entry with zero literals.
void validate(const CnfFormula& f);

/// M clauses, each over 3 distinct variables chosen uniformly without
/// replacement, each negated with probability 1/2. Clauses are drawn
/// independently, so duplicates may occur. Throws InvalidSize for n < 3.
CnfFormula random_3sat(std::size_t n, std::size_t m, Rng& rng);

enum class SatStatus { Sat, Unsat, Timeout };
std::string_view status_name(SatStatus s);

struct SatResult {
  SatStatus status = SatStatus::Timeout;
  /// assignment[v] for v in 1..n (index 0 unused); valid when Sat.
  std::vector<bool> assignment;
  std::uint64_t nodes = 0;  ///< branching decisions made
};

/// DPLL with unit propagation, pure-literal elimination and a
/// shortest-clause branching rule. Gives up with Timeout after `budget` nodes.
SatResult dpll_solve(const CnfFormula& f, std::uint64_t budget = 10'000'000);

bool satisfies(const CnfFormula& f, const std::vector<bool>& assignment);

/// Exhaustive check over all 2^n assignments; n <= 20.
bool brute_force_satisfiable(const CnfFormula& f);

std::string to_dimacs(const CnfFormula& f);
CnfFormula parse_dimacs(std::string_view text);

struct SweepRow {
  double alpha = 0.0;
  std::size_t m = 0;
  std::size_t sat = 0;
  std::size_t unsat = 0;
  std::size_t timeouts = 0;
  double fraction = 0.0;  ///< sat / (sat + unsat)
  double median_nodes = 0.0;
};

/// For each alpha, M = round(alpha N); trial t of alpha index a draws its
/// formula from substream t of Rng(seed, a).
std::vector<SweepRow> phase_sweep(std::size_t n, const std::vector<double>& alphas, std::size_t trials,
                                  std::uint64_t seed, std::uint64_t budget = 10'000'000);

/// First alpha where the satisfiable fraction crosses 0.5, linearly
/// interpolated between neighbouring rows; NaN if it never does.
double crossing_alpha(const std::vector<SweepRow>& rows);

}  // namespace carvelab
