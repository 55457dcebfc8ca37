#include "carvelab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "carvelab/error.hpp"
#include "carvelab/parallel.hpp"

namespace carvelab {

SymmetricMatrix sample_goe(const GoeSpec& spec, Rng& rng) {
  if (spec.n < 1) throw InvalidSize("GOE dimension must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  SymmetricMatrix m(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    m.set(i, i, std::sqrt(2.0) * spec.scale * normal(rng));
    for (std::size_t j = i + 1; j < spec.n; ++j) m.set(i, j, spec.scale * normal(rng));
  }
  return m;
}

bool positive_definite(const SymmetricMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) return false;
    const double root = std::sqrt(d);
    l[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / root;
    }
  }
  return true;
}

ProbabilityEstimate wilson_interval(std::size_t hits, std::size_t trials, double z) {
  ProbabilityEstimate e;
  e.hits = hits;
  e.trials = trials;
  if (trials == 0) return e;
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / nt;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nt)) / (1.0 + z2 / nt);
  const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / (1.0 + z2 / nt);
  e.p = p;
  // The endpoints are exactly 0 and 1 at the extremes; rounding would leave dust.
  e.lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  e.hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return e;
}

ProbabilityEstimate prob_positive_definite(std::size_t n, std::size_t trials, std::uint64_t seed, double scale) {
  if (trials < 1) throw PreconditionViolation("need at least one trial");
  const Rng root(seed, n);
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (trials + chunk - 1) / chunk;
  std::vector<std::size_t> hits(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(trials, (c + 1) * chunk);
    for (std::size_t t = c * chunk; t < end; ++t) {
      Rng rng = root.substream(t);
      if (positive_definite(sample_goe({n, scale}, rng))) ++hits[c];
    }
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  auto e = wilson_interval(total, trials);
  e.n = n;
  return e;
}

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("all n values are equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / m);
  return f;
}

}  // namespace

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw DegenerateFit("need at least 3 (n, p) pairs");
  std::vector<double> n1, n2, y;
  bool all_equal = true;
  for (const auto& [n, p] : pairs) {
    if (!(p > 0.0) || !(p <= 1.0)) throw DegenerateFit("probabilities must lie in (0, 1]");
    if (p != pairs.front().second) all_equal = false;
    n1.push_back(n);
    n2.push_back(n * n);
    y.push_back(-std::log(p));
  }
  if (all_equal) throw DegenerateFit("all probabilities are equal");
  const auto quad = least_squares(n2, y);
  const auto lin = least_squares(n1, y);
  DecayFit fit;
  fit.k = quad.slope;
  fit.intercept = quad.intercept;
  fit.residual = quad.rms;
  fit.linear_residual = lin.rms;
  fit.poor = lin.rms <= quad.rms;
  return fit;
}

std::vector<MultiIndex> monomials_up_to(std::size_t nvars, std::size_t degree) {
  std::vector<MultiIndex> out;
  MultiIndex alpha(nvars, 0);
  for (std::size_t total = 0; total <= degree; ++total) {
    // Compositions of `total` into nvars parts, lexicographically descending.
    std::vector<MultiIndex> level;
    auto rec = [&](auto&& self, std::size_t k, std::size_t left) -> void {
      if (k + 1 == nvars) {
        alpha[k] = static_cast<std::uint32_t>(left);
        level.push_back(alpha);
        return;
      }
      for (std::size_t e = left + 1; e-- > 0;) {
        alpha[k] = static_cast<std::uint32_t>(e);
        self(self, k + 1, left - e);
      }
    };
    if (nvars == 0) {
      if (total == 0) out.emplace_back();
      continue;
    }
    rec(rec, 0, total);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

double multinomial_variance(const MultiIndex& alpha, std::size_t degree) {
  const std::uint32_t s = total_degree(alpha);
  if (s > degree) throw PreconditionViolation("monomial degree exceeds the polynomial degree");
  double v = std::tgamma(static_cast<double>(degree) + 1.0) / std::tgamma(static_cast<double>(degree - s) + 1.0);
  for (auto a : alpha) v /= std::tgamma(static_cast<double>(a) + 1.0);
  return std::round(v);
}

Polynomial<double> sample_random_polynomial(const RandomPolynomialSpec& spec, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Polynomial<double> p(spec.nvars);
  for (const auto& alpha : monomials_up_to(spec.nvars, spec.degree))
    p.add_term(alpha, std::sqrt(multinomial_variance(alpha, spec.degree)) * normal(rng));
  return p;
}

CriticalPointStats critical_point_stats(const RandomPolynomialSpec& spec, std::size_t trials, std::uint64_t seed,
                                        const CriticalSearchOptions& options) {
  if (trials < 1) throw PreconditionViolation("need at least one trial");
  const Rng root(seed, 0x5eed);
  std::vector<CriticalSearch> found(trials);
  // Searches parallelise internally over starts; draws run in order.
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = root.substream(t);
    const auto p = sample_random_polynomial(spec, rng);
    found[t] = find_critical_points(p, rng, options);
  }
  CriticalPointStats s;
  s.trials = trials;
  std::size_t mins = 0, maxs = 0, saddles = 0, degenerate = 0;
  for (const auto& f : found) {
    s.total += f.points.size();
    s.failed_starts += f.failed_starts;
    for (const auto& c : f.points) {
      switch (c.kind) {
        case CriticalClass::LocalMin: ++mins; break;
        case CriticalClass::LocalMax: ++maxs; break;
        case CriticalClass::Saddle: ++saddles; break;
        case CriticalClass::Degenerate: ++degenerate; break;
      }
    }
  }
  s.mean_count = static_cast<double>(s.total) / static_cast<double>(trials);
  if (s.total > 0) {
    const double tot = static_cast<double>(s.total);
    s.fraction_min = mins / tot;
    s.fraction_max = maxs / tot;
    s.fraction_saddle = saddles / tot;
    s.fraction_degenerate = degenerate / tot;
  }
  return s;
}

double expected_saddles_before_minimum(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("p must lie in (0, 1]");
  return 1.0 / p;
}

double geometric_sample_mean(double p, std::size_t draws, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidProbability("p must lie in (0, 1]");
  if (draws == 0) throw PreconditionViolation("need at least one draw");
  std::geometric_distribution<std::uint64_t> geom(p);
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) sum += static_cast<double>(geom(rng) + 1);
  return sum / static_cast<double>(draws);
}

}  // namespace carvelab
