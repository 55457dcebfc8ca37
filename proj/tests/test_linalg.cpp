#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "carvelab/error.hpp"
#include "carvelab/linalg.hpp"
#include "carvelab/rng.hpp"

using namespace carvelab;

TEST_CASE("spectrum of the cubic's Hessian at the origin") {
  const auto m = SymmetricMatrix::from_rows({{0, -1}, {-1, 0}});
  const auto s = spectrum(m);
  CHECK(s.eigenvalues == std::vector<double>{1.0, -1.0});
  CHECK(s.index_count == 1);
  CHECK(s.index_fraction == 0.5);
  CHECK(classify_critical_point(s) == CriticalClass::Saddle);
  CHECK(class_name(CriticalClass::Saddle) == "saddle");
}

TEST_CASE("identity and diagonal spectra") {
  const auto s = spectrum(SymmetricMatrix::identity(3));
  CHECK(s.eigenvalues == std::vector<double>{1, 1, 1});
  CHECK(s.index_count == 0);
  CHECK(classify_critical_point(s) == CriticalClass::LocalMin);
  const std::vector<double> d{2, 3};
  CHECK(classify_critical_point(spectrum(SymmetricMatrix::diagonal(d))) == CriticalClass::LocalMin);
  const std::vector<double> neg{-2, -3};
  CHECK(classify_critical_point(spectrum(SymmetricMatrix::diagonal(neg))) == CriticalClass::LocalMax);
  const std::vector<double> flat{1e-15, 4};
  const auto fs = spectrum(SymmetricMatrix::diagonal(flat), 1e-9);
  CHECK(fs.degenerate_count == 1);
  CHECK(classify_critical_point(fs) == CriticalClass::Degenerate);
}

TEST_CASE("random symmetric matrices reconstruct and match Eigen") {
  Rng rng(1, 0);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 5;
    SymmetricMatrix m(n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double v = g(rng);
        m.set(i, j, v);
        e(i, j) = e(j, i) = v;
      }
    const auto s = spectrum(m);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double r = 0;
        for (std::size_t k = 0; k < n; ++k) r += s.eigenvectors[k][i] * s.eigenvalues[k] * s.eigenvectors[k][j];
        worst = std::max(worst, std::abs(r - m(i, j)));
      }
    CHECK(worst <= 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
    for (std::size_t k = 0; k < n; ++k) CHECK(s.eigenvalues[k] == doctest::Approx(solver.eigenvalues()[n - 1 - k]).epsilon(1e-10));
    CHECK(std::is_sorted(s.eigenvalues.rbegin(), s.eigenvalues.rend()));
  }
}

TEST_CASE("non-symmetric input") {
  CHECK_THROWS_AS(SymmetricMatrix::from_rows({{1, 2}, {3, 4}}), NonSymmetric);
  CHECK_THROWS_AS(SymmetricMatrix::from_rows({{1, 2}}), DimensionMismatch);
}

TEST_CASE("Taylor step gain") {
  const std::vector<double> d{4, 1};
  const auto m = SymmetricMatrix::diagonal(d);
  CHECK(taylor_step_gain(m, std::vector<double>{1, 0}) == doctest::Approx(2.0));
  const double r = 1 / std::sqrt(2.0);
  CHECK(taylor_step_gain(m, std::vector<double>{r, r}) == doctest::Approx(1.25));
  CHECK_THROWS_AS(taylor_step_gain(m, std::vector<double>{1, 1}), NonUnitDirection);

  // On a quadratic bowl the prediction h^2 * gain is the exact change.
  const double h = 1e-3;
  const std::vector<double> dir{0.6, 0.8};
  auto loss = [&](double x, double y) { return 0.5 * (4 * x * x + y * y); };
  const double actual = loss(h * dir[0], h * dir[1]) - loss(0, 0);
  CHECK(std::abs(actual - h * h * taylor_step_gain(m, dir)) <= 1e-8);
}

TEST_CASE("Gram-Schmidt") {
  std::vector<std::vector<double>> v{{1, 1, 0}, {1, 0, 1}, {2, 1, 1}};
  gram_schmidt(v);
  REQUIRE(v.size() == 2);
  CHECK(std::abs(dot(v[0], v[1])) <= 1e-12);
  CHECK(norm(v[1]) == doctest::Approx(1.0));
}
