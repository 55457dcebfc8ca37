#include "carvelab/spinglass.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "carvelab/error.hpp"
#include "carvelab/parallel.hpp"
#include "carvelab/polyland.hpp"

namespace carvelab {

IsingSystem sample_ising(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw InvalidSize("lattice must be nonempty");
  std::normal_distribution<double> normal(0.0, 1.0);
  IsingSystem s;
  s.rows = rows;
  s.cols = cols;
  s.right.resize(rows * (cols - 1));
  s.down.resize((rows - 1) * cols);
  for (auto& j : s.right) j = normal(rng);
  for (auto& j : s.down) j = normal(rng);
  s.spins.resize(rows * cols);
  for (auto& v : s.spins) v = (rng() >> 63) ? 1 : -1;
  return s;
}

double ising_energy(const IsingSystem& s) {
  if (s.spins.size() != s.rows * s.cols || s.right.size() != s.rows * (s.cols - 1) ||
      s.down.size() != (s.rows - 1) * s.cols)
    throw DimensionMismatch("Ising arrays do not match the lattice shape");
  double h = 0.0;
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) {
      const int si = s.spins[r * s.cols + c];
      if (c + 1 < s.cols) h -= s.right[r * (s.cols - 1) + c] * si * s.spins[r * s.cols + c + 1];
      if (r + 1 < s.rows) h -= s.down[r * s.cols + c] * si * s.spins[(r + 1) * s.cols + c];
    }
  return h;
}

PSpinSystem sample_pspin(std::size_t n, std::size_t p, Rng& rng) {
  if (p < 1 || n < p) throw InvalidSize("need 1 <= p <= N");
  double variance = std::tgamma(static_cast<double>(p) + 1.0) / (2.0 * std::pow(static_cast<double>(n), p - 1.0));
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  PSpinSystem sys;
  sys.n = n;
  sys.p = p;
  // Enumerate tuples i1 > i2 > ... > ip in lexicographic order.
  std::vector<std::uint32_t> idx(p);
  auto rec = [&](auto&& self, std::size_t k, std::uint32_t below) -> void {
    if (k == p) {
      sys.couplings.push_back({idx, normal(rng)});
      return;
    }
    for (std::uint32_t i = static_cast<std::uint32_t>(p - k - 1); i < below; ++i) {
      idx[k] = i;
      self(self, k + 1, i);
    }
  };
  rec(rec, 0, static_cast<std::uint32_t>(n));
  return sys;
}

double pspin_energy_raw(const PSpinSystem& sys, std::span<const double> sigma) {
  if (sigma.size() != sys.n) throw DimensionMismatch("spin vector length differs from N");
  double h = 0.0;
  for (const auto& c : sys.couplings) {
    double prod = c.j;
    for (auto i : c.indices) prod *= sigma[i];
    h -= prod;
  }
  return h;
}

namespace {

void check_sphere(const PSpinSystem& sys, std::span<const double> sigma) {
  if (sigma.size() != sys.n) throw DimensionMismatch("spin vector length differs from N");
  const double r2 = dot(sigma, sigma);
  const double n = static_cast<double>(sys.n);
  if (std::abs(r2 - n) > 1e-9 * std::max(1.0, n))
    throw ConstraintViolation("spins are off the sphere: |s|^2 = " + std::to_string(r2));
}

std::vector<double> euclidean_gradient(const PSpinSystem& sys, std::span<const double> sigma) {
  std::vector<double> g(sys.n, 0.0);
  for (const auto& c : sys.couplings) {
    for (std::size_t k = 0; k < c.indices.size(); ++k) {
      double prod = -c.j;
      for (std::size_t m = 0; m < c.indices.size(); ++m)
        if (m != k) prod *= sigma[c.indices[m]];
      g[c.indices[k]] += prod;
    }
  }
  return g;
}

std::vector<double> tangent_projection(std::span<const double> g, std::span<const double> sigma) {
  const double n = dot(sigma, sigma);
  const double c = dot(g, sigma) / n;
  std::vector<double> r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) r[i] = g[i] - c * sigma[i];
  return r;
}

}  // namespace

PSpinEvaluation pspin_energy(const PSpinSystem& sys, std::span<const double> sigma) {
  check_sphere(sys, sigma);
  PSpinEvaluation e;
  e.energy = pspin_energy_raw(sys, sigma);
  e.euclidean_gradient = euclidean_gradient(sys, sigma);
  e.riemannian_gradient = tangent_projection(e.euclidean_gradient, sigma);
  e.gradient_norm = norm(e.riemannian_gradient);
  return e;
}

std::vector<double> pspin_euclidean_hessian(const PSpinSystem& sys, std::span<const double> sigma) {
  if (sigma.size() != sys.n) throw DimensionMismatch("spin vector length differs from N");
  const std::size_t n = sys.n;
  std::vector<double> h(n * n, 0.0);
  for (const auto& c : sys.couplings) {
    const std::size_t p = c.indices.size();
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) {
        double prod = -c.j;
        for (std::size_t m = 0; m < p; ++m)
          if (m != a && m != b) prod *= sigma[c.indices[m]];
        h[c.indices[a] * n + c.indices[b]] += prod;
        h[c.indices[b] * n + c.indices[a]] += prod;
      }
  }
  return h;
}

SymmetricMatrix constrained_hessian(const PSpinSystem& sys, std::span<const double> sigma) {
  const std::size_t n = sys.n;
  const auto h = pspin_euclidean_hessian(sys, sigma);
  const auto g = euclidean_gradient(sys, sigma);
  const double mu = dot(g, sigma) / dot(sigma, sigma);

  std::vector<std::vector<double>> basis;
  basis.emplace_back(sigma.begin(), sigma.end());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    basis.push_back(std::move(e));
  }
  gram_schmidt(basis, 1e-8);
  basis.erase(basis.begin());
  basis.resize(std::min(basis.size(), n - 1));

  const std::size_t m = basis.size();
  std::vector<std::vector<double>> hb(m, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += h[i * n + j] * basis[a][j];
      hb[a][i] = s - mu * basis[a][i];
    }
  SymmetricMatrix out(m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      // Average both products so the result is symmetric to the last bit.
      out.set(a, b, 0.5 * (dot(basis[a], hb[b]) + dot(basis[b], hb[a])));
    }
  return out;
}

Polynomial<double> pspin_polynomial(const PSpinSystem& sys) {
  Polynomial<double> poly(sys.n);
  for (const auto& c : sys.couplings) {
    MultiIndex alpha(sys.n, 0);
    for (auto i : c.indices) ++alpha[i];
    poly.add_term(std::move(alpha), -c.j);
  }
  return poly;
}

void project_to_sphere(std::vector<double>& sigma) {
  const double r = norm(sigma);
  if (!(r > 0.0) || !std::isfinite(r)) throw Diverged("cannot project a zero or non-finite vector");
  const double scale = std::sqrt(static_cast<double>(sigma.size())) / r;
  for (auto& s : sigma) s *= scale;
}

std::vector<double> random_sphere_point(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> s(n);
  for (auto& v : s) v = normal(rng);
  project_to_sphere(s);
  return s;
}

DescentResult spherical_descent(const PSpinSystem& sys, std::span<const double> sigma0, const DescentOptions& options) {
  check_sphere(sys, sigma0);
  DescentResult r;
  r.sigma.assign(sigma0.begin(), sigma0.end());
  auto eval = pspin_energy(sys, r.sigma);
  for (std::size_t step = 0; step < options.steps; ++step) {
    if (!std::isfinite(eval.energy)) throw Diverged("energy became non-finite");
    r.energies.push_back(eval.energy);
    if (eval.gradient_norm <= options.tolerance) break;
    for (std::size_t i = 0; i < sys.n; ++i) r.sigma[i] -= options.rate * eval.riemannian_gradient[i];
    project_to_sphere(r.sigma);
    eval = pspin_energy(sys, r.sigma);
    ++r.steps_taken;
  }
  if (!std::isfinite(eval.energy)) throw Diverged("energy became non-finite");
  r.energies.push_back(eval.energy);
  r.energy = eval.energy;
  r.gradient_norm = eval.gradient_norm;
  return r;
}

NewtonResult sphere_newton(const PSpinSystem& sys, std::span<const double> sigma0, std::size_t iterations,
                           double tolerance) {
  const std::size_t n = sys.n;
  NewtonResult r;
  r.sigma.assign(sigma0.begin(), sigma0.end());
  auto g = euclidean_gradient(sys, r.sigma);
  r.lagrange = dot(g, r.sigma) / dot(r.sigma, r.sigma);
  Eigen::MatrixXd jac(n + 1, n + 1);
  Eigen::VectorXd f(n + 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto h = pspin_euclidean_hessian(sys, r.sigma);
    for (std::size_t i = 0; i < n; ++i) {
      f(i) = g[i] - r.lagrange * r.sigma[i];
      for (std::size_t j = 0; j < n; ++j) jac(i, j) = h[i * n + j] - (i == j ? r.lagrange : 0.0);
      jac(i, n) = -r.sigma[i];
      jac(n, i) = r.sigma[i];
    }
    f(n) = 0.5 * (dot(r.sigma, r.sigma) - static_cast<double>(n));
    jac(n, n) = 0.0;
    if (f.norm() <= 1e-13 * static_cast<double>(n)) break;
    const Eigen::VectorXd delta = jac.partialPivLu().solve(-f);
    if (!delta.allFinite()) break;
    for (std::size_t i = 0; i < n; ++i) r.sigma[i] += delta(i);
    r.lagrange += delta(n);
    g = euclidean_gradient(sys, r.sigma);
    if (norm(r.sigma) > 1e6) break;
  }
  if (!std::all_of(r.sigma.begin(), r.sigma.end(), [](double v) { return std::isfinite(v); }) ||
      !(norm(r.sigma) > 0.0)) {
    r.sigma.assign(sigma0.begin(), sigma0.end());
    r.converged = false;
    r.gradient_norm = pspin_energy(sys, r.sigma).gradient_norm;
    return r;
  }
  project_to_sphere(r.sigma);
  const auto e = pspin_energy(sys, r.sigma);
  r.gradient_norm = e.gradient_norm;
  r.lagrange = dot(e.euclidean_gradient, r.sigma) / static_cast<double>(n);
  r.converged = r.gradient_norm <= tolerance;
  return r;
}

std::vector<ProfilePoint> index_energy_profile(std::size_t n, std::size_t p, std::size_t trials, std::uint64_t seed,
                                               const ProfileOptions& options) {
  if (n < 2) throw InvalidSize("need at least 2 spins");
  Rng system_rng(seed, 0);
  const auto sys = sample_pspin(n, p, system_rng);
  const Rng root(seed, 1);
  std::vector<ProfilePoint> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = root.substream(t);
    const auto start = random_sphere_point(n, rng);
    const std::size_t steps = static_cast<std::size_t>(rng() % (options.max_descent_steps + 1));
    const auto descent = spherical_descent(sys, start, {steps, options.rate, 0.0});
    const auto polished = sphere_newton(sys, descent.sigma, 60, options.tolerance);
    ProfilePoint& pt = out[t];
    pt.descent_steps = steps;
    pt.energy_per_spin = pspin_energy_raw(sys, polished.sigma) / static_cast<double>(n);
    pt.gradient_norm = polished.gradient_norm;
    pt.converged = polished.converged;
    const auto s = spectrum(constrained_hessian(sys, polished.sigma));
    pt.index = s.index_count;
    pt.index_fraction = s.index_fraction;
  });
  return out;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("rank correlation needs equal-length samples");
  if (a.size() < 2) throw PreconditionViolation("rank correlation needs at least 2 samples");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double m = static_cast<double>(a.size());
  const double mean = (m + 1.0) / 2.0;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

MonomialShapeReport monomial_shape_report(std::size_t depth, std::size_t p, std::uint64_t seed) {
  if (depth < 1 || p < 1) throw InvalidSize("depth and p must be positive");
  // Chain x -> h1 -> ... -> y with unit weights, every relu active at x = 1.
  std::vector<NeuronDecl> decls{{"x", NeuronKind::Input, {}, 0}};
  std::string prev = "x";
  for (std::size_t l = 1; l < depth; ++l) {
    const std::string id = "h" + std::to_string(l);
    decls.push_back({id, NeuronKind::Relu, {{prev, Rational(1)}}, 0});
    prev = id;
  }
  decls.push_back({"y", NeuronKind::Linear, {{prev, Rational(1)}}, 0});
  const Network chain(std::move(decls), 1, "chain");
  const double x[1] = {1.0};
  const auto net_poly = parameter_polynomial(chain, x);

  MonomialShapeReport report;
  std::vector<std::string> names;
  for (const auto& info : parameter_layout(chain)) names.push_back(info.name);
  for (const auto& [alpha, c] : net_poly.terms()) {
    std::size_t factors = 0;
    for (auto e : alpha) factors += e > 0;
    if (factors > report.network_weight_factors) {
      report.network_weight_factors = factors;
      report.network_multilinear = std::all_of(alpha.begin(), alpha.end(), [](auto e) { return e <= 1; });
      Polynomial<double> single(alpha.size());
      single.add_term(alpha, c);
      std::ostringstream os;
      os << "x*" << single.str([](double) { return std::string("1"); }, names).substr(2);
      report.network_example = os.str();
    }
  }
  // Bias paths carry no input factor, so the deepest monomial is the input path.
  Rng rng(seed, 7);
  const auto sys = sample_pspin(std::max<std::size_t>(p, 3), p, rng);
  const auto spin_poly = pspin_polynomial(sys);
  const auto& [alpha, c] = *spin_poly.terms().begin();
  for (auto e : alpha) report.spin_factors += e > 0;
  report.spin_multilinear = std::all_of(alpha.begin(), alpha.end(), [](auto e) { return e <= 1; });
  {
    Polynomial<double> single(alpha.size());
    single.add_term(alpha, c);
    std::vector<std::string> spin_names;
    for (std::size_t i = 0; i < sys.n; ++i) spin_names.push_back("s" + std::to_string(i));
    report.spin_example = "J*" + single.str([](double) { return std::string("1"); }, spin_names).substr(2);
  }
  report.match = report.network_multilinear && report.spin_multilinear &&
                 report.network_weight_factors == report.spin_factors;
  return report;
}

}  // namespace carvelab
