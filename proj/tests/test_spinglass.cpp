#include <doctest.h>

#include <Eigen/Dense>

#include "carvelab/error.hpp"
#include "carvelab/spinglass.hpp"

using namespace carvelab;

TEST_CASE("Ising pairs") {
  IsingSystem s{1, 2, {1.0}, {}, {1, 1}};
  CHECK(ising_energy(s) == -1.0);
  s.spins = {1, -1};
  CHECK(ising_energy(s) == 1.0);

  Rng rng(1, 0);
  for (int t = 0; t < 100; ++t) {
    auto sys = sample_ising(4, 5, rng);
    const double h = ising_energy(sys);
    for (auto& v : sys.spins) v = -v;
    CHECK(ising_energy(sys) == h);
  }
}

TEST_CASE("p-spin energies") {
  Rng rng(2, 0);
  const auto sys2 = sample_pspin(6, 2, rng);
  CHECK(sys2.couplings.size() == 15);
  auto sigma = random_sphere_point(6, rng);
  // Direct double sum over the upper triangle.
  double direct = 0;
  for (const auto& c : sys2.couplings) direct -= c.j * sigma[c.indices[0]] * sigma[c.indices[1]];
  CHECK(pspin_energy(sys2, sigma).energy == doctest::Approx(direct).epsilon(1e-14));

  const auto sys3 = sample_pspin(7, 3, rng);
  auto s3 = random_sphere_point(7, rng);
  const double e3 = pspin_energy(sys3, s3).energy;
  for (auto& v : s3) v = -v;
  CHECK(pspin_energy(sys3, s3).energy == doctest::Approx(-e3));
  for (auto& v : sigma) v = -v;
  CHECK(pspin_energy(sys2, sigma).energy == doctest::Approx(direct));

  std::vector<double> off(7, 1.5);
  CHECK_THROWS_AS(pspin_energy(sys3, off), ConstraintViolation);
  CHECK_THROWS_AS(sample_pspin(2, 3, rng), InvalidSize);
}

TEST_CASE("gradients and the polynomial form agree") {
  Rng rng(3, 0);
  const auto sys = sample_pspin(8, 3, rng);
  const auto sigma = random_sphere_point(8, rng);
  const auto e = pspin_energy(sys, sigma);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 8; ++i) {
    auto p = sigma, m = sigma;
    p[i] += h;
    m[i] -= h;
    CHECK(e.euclidean_gradient[i] ==
          doctest::Approx((pspin_energy_raw(sys, p) - pspin_energy_raw(sys, m)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(std::abs(dot(e.riemannian_gradient, sigma)) <= 1e-10);
  CHECK(pspin_polynomial(sys).evaluate(sigma) == doctest::Approx(e.energy).epsilon(1e-12));
  CHECK(pspin_polynomial(sys).degree() == 3);
}

TEST_CASE("descent stays on the sphere") {
  Rng rng(4, 0);
  const auto sys = sample_pspin(10, 3, rng);
  const auto s0 = random_sphere_point(10, rng);
  const auto r = spherical_descent(sys, s0, {300, 1e-2, 0});
  CHECK(std::abs(dot(r.sigma, r.sigma) - 10.0) <= 1e-9);
  CHECK(r.energies.back() <= r.energies.front());

  PSpinSystem empty{5, 3, {}};
  const auto s = random_sphere_point(5, rng);
  const auto still = spherical_descent(empty, s, {50, 1e-2, 0});
  CHECK(still.sigma == s);
  CHECK(still.gradient_norm == 0.0);
}

TEST_CASE("p = 2 descent finds the top eigenvector") {
  Rng rng(5, 0);
  const std::size_t n = 12;
  const auto sys = sample_pspin(n, 2, rng);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : sys.couplings) {
    a(c.indices[0], c.indices[1]) += c.j / 2;
    a(c.indices[1], c.indices[0]) += c.j / 2;
  }
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();
  const auto r = spherical_descent(sys, random_sphere_point(n, rng), {20000, 5e-2, 1e-10});
  CHECK(r.energy == doctest::Approx(-static_cast<double>(n) * top).epsilon(1e-6));
}

TEST_CASE("constrained Hessian and Newton polish") {
  Rng rng(6, 0);
  const auto sys = sample_pspin(10, 3, rng);
  const auto d = spherical_descent(sys, random_sphere_point(10, rng), {3000, 2e-2, 1e-8});
  const auto nr = sphere_newton(sys, d.sigma);
  CHECK(nr.converged);
  CHECK(nr.gradient_norm <= 1e-6);
  const auto h = constrained_hessian(sys, nr.sigma);
  CHECK(h.size() == 9);
  // Descent ends at a minimum: no negative directions.
  CHECK(spectrum(h).index_count == 0);
}

TEST_CASE("index-energy profile is reproducible and layered") {
  const auto a = index_energy_profile(12, 3, 40, 7);
  const auto b = index_energy_profile(12, 3, 40, 7);
  REQUIRE(a.size() == 40);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].energy_per_spin == b[k].energy_per_spin);
    CHECK(a[k].index == b[k].index);
  }
  std::size_t converged = 0;
  for (const auto& p : a) {
    converged += p.converged;
    if (p.converged) CHECK(p.index_fraction == doctest::Approx(static_cast<double>(p.index) / 11.0));
  }
  CHECK(converged >= 20);
}

TEST_CASE("rank correlation") {
  const std::vector<double> x{1, 2, 3, 4}, y{10, 20, 30, 40}, z{4, 3, 2, 1}, t{1, 1, 2, 2};
  CHECK(spearman(x, y) == doctest::Approx(1.0));
  CHECK(spearman(x, z) == doctest::Approx(-1.0));
  CHECK(spearman(x, t) == doctest::Approx(0.8944271909999159));
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), PreconditionViolation);
}

TEST_CASE("monomial shapes of deep nets and spin glasses") {
  const auto r = monomial_shape_report(3, 3);
  CHECK(r.network_weight_factors == 3);
  CHECK(r.spin_factors == 3);
  CHECK(r.network_multilinear);
  CHECK(r.spin_multilinear);
  CHECK(r.match);
}
