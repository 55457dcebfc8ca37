#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "carvelab/linalg.hpp"
#include "carvelab/polyland.hpp"
#include "carvelab/polynomial.hpp"
#include "carvelab/rng.hpp"

namespace carvelab {

/// Off-diagonal entries N(0, scale^2), diagonal N(0, 2 scale^2).
struct GoeSpec {
  std::size_t n = 1;
  double scale = 1.0;
};

SymmetricMatrix sample_goe(const GoeSpec& spec, Rng& rng);

/// True when the Cholesky factorisation succeeds with a positive pivot at
/// every step, i.e. the smallest eigenvalue is positive.
bool positive_definite(const SymmetricMatrix& m);

struct ProbabilityEstimate {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t hits = 0;
  double p = 0.0;
  double lo = 0.0;  ///< 95% Wilson interval
  double hi = 0.0;
};

ProbabilityEstimate wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

/// Fraction of GOE(n) draws that are positive definite. Trial t uses
/// substream t of Rng(seed, n), so results do not depend on threading.
ProbabilityEstimate prob_positive_definite(std::size_t n, std::size_t trials, std::uint64_t seed, double scale = 1.0);

struct DecayFit {
  double k = 0.0;          ///< slope of -ln p against n^2
  double intercept = 0.0;
  double residual = 0.0;   ///< RMS residual of that fit
  /// RMS residual of the competing fit of -ln p against n (with intercept).
  double linear_residual = 0.0;
  /// The n-linear model explains the data at least as well as the n^2 one.
  bool poor = false;
};

/// Least squares of -ln p on n^2 with an intercept. Needs at least 3
/// pairs with 0 < p; throws DegenerateFit when every p is equal.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& pairs);

/// Coefficient of x^alpha has variance d! / (alpha_1! ... alpha_n! (d - |alpha|)!).
struct RandomPolynomialSpec {
  std::size_t nvars = 2;
  std::size_t degree = 2;
};

/// Every multi-index with |alpha| <= degree, in graded lexicographic order.
std::vector<MultiIndex> monomials_up_to(std::size_t nvars, std::size_t degree);
double multinomial_variance(const MultiIndex& alpha, std::size_t degree);

Polynomial<double> sample_random_polynomial(const RandomPolynomialSpec& spec, Rng& rng);

struct CriticalPointStats {
  std::size_t trials = 0;
  double mean_count = 0.0;
  std::size_t total = 0;
  double fraction_min = 0.0;
  double fraction_max = 0.0;
  double fraction_saddle = 0.0;
  double fraction_degenerate = 0.0;
  std::size_t failed_starts = 0;
};

/// Draw t uses substream t of Rng(seed); its multi-start search uses the
/// draw's own generator after the coefficients.
CriticalPointStats critical_point_stats(const RandomPolynomialSpec& spec, std::size_t trials, std::uint64_t seed,
                                        const CriticalSearchOptions& options = {});

/// E[X] = 1/p for the number of trials up to and including the first success.
double expected_saddles_before_minimum(double p);
double geometric_sample_mean(double p, std::size_t draws, Rng& rng);

}  // namespace carvelab
