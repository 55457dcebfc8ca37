#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "carvelab/linalg.hpp"
#include "carvelab/polynomial.hpp"
#include "carvelab/rng.hpp"

namespace carvelab {

/// Ising model on a rows x cols grid with open boundaries.
struct IsingSystem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> right;  ///< coupling (r,c)-(r,c+1), index r*(cols-1)+c
  std::vector<double> down;   ///< coupling (r,c)-(r+1,c), index r*cols+c
  std::vector<int> spins;     ///< +1 / -1, row-major
};

/// Gaussian N(0,1) couplings and uniformly random spins.
IsingSystem sample_ising(std::size_t rows, std::size_t cols, Rng& rng);

/// H = -sum over neighbour pairs of J_ij s_i s_j.
double ising_energy(const IsingSystem& sys);

struct PSpinCoupling {
  std::vector<std::uint32_t> indices;  ///< strictly decreasing
  double j = 0.0;
};

struct PSpinSystem {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<PSpinCoupling> couplings;
};

/// One coupling per strictly decreasing index tuple, N(0, p! / (2 N^(p-1))).
PSpinSystem sample_pspin(std::size_t n, std::size_t p, Rng& rng);

struct PSpinEvaluation {
  double energy = 0.0;
  std::vector<double> euclidean_gradient;
  std::vector<double> riemannian_gradient;  ///< g - (g . s / N) s
  double gradient_norm = 0.0;               ///< of the Riemannian gradient
};

/// H = -sum J s_i1 ... s_ip. Throws ConstraintViolation unless |s.s - N| <= 1e-9 max(1, N).
PSpinEvaluation pspin_energy(const PSpinSystem& sys, std::span<const double> sigma);

/// Energy without the constraint check, for arbitrary points.
double pspin_energy_raw(const PSpinSystem& sys, std::span<const double> sigma);

/// Euclidean Hessian of H, row-major N x N.
std::vector<double> pspin_euclidean_hessian(const PSpinSystem& sys, std::span<const double> sigma);

/// Hessian restricted to the sphere, expressed in an orthonormal basis of
/// the tangent space at sigma (N - 1 dimensions).
SymmetricMatrix constrained_hessian(const PSpinSystem& sys, std::span<const double> sigma);

/// H as a polynomial in the N spins.
Polynomial<double> pspin_polynomial(const PSpinSystem& sys);

/// Scales sigma onto the sphere s.s = N.
void project_to_sphere(std::vector<double>& sigma);
std::vector<double> random_sphere_point(std::size_t n, Rng& rng);

struct DescentOptions {
  std::size_t steps = 2000;
  double rate = 1e-2;
  /// Stop once the Riemannian gradient norm falls to this value (0 never stops early).
  double tolerance = 0.0;
};

struct DescentResult {
  std::vector<double> sigma;
  double energy = 0.0;
  double gradient_norm = 0.0;
  std::size_t steps_taken = 0;
  std::vector<double> energies;  ///< energy before each step, then the final one
};

/// Projected gradient steps, renormalised onto the sphere after each one.
/// Throws Diverged if the energy becomes non-finite.
DescentResult spherical_descent(const PSpinSystem& sys, std::span<const double> sigma0, const DescentOptions& options);

struct NewtonResult {
  std::vector<double> sigma;
  double lagrange = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Newton's method on grad H - mu sigma = 0, (sigma.sigma - N)/2 = 0. Finds the
/// critical point on the sphere nearest to the start regardless of its index.
NewtonResult sphere_newton(const PSpinSystem& sys, std::span<const double> sigma0, std::size_t iterations = 50,
                           double tolerance = 1e-6);

struct ProfilePoint {
  double energy_per_spin = 0.0;
  std::size_t index = 0;
  double index_fraction = 0.0;  ///< index / (N - 1)
  double gradient_norm = 0.0;
  bool converged = false;
  std::size_t descent_steps = 0;
};

struct ProfileOptions {
  std::size_t max_descent_steps = 400;
  double rate = 2e-2;
  double tolerance = 1e-6;
};

/// Trial t: random start from substream t, descent for a uniformly random
/// number of steps in [0, max_descent_steps], then Newton polishing to a
/// nearby critical point, whose constrained Hessian supplies the index.
/// Truncating the descent at different depths lands on critical points of
/// every energy level, not only minima.
std::vector<ProfilePoint> index_energy_profile(std::size_t n, std::size_t p, std::size_t trials, std::uint64_t seed,
                                               const ProfileOptions& options = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// Side-by-side shapes of a network path monomial x_i w_1 ... w_depth and a
/// p-spin monomial J s_1 ... s_p, read off the actual polynomials.
struct MonomialShapeReport {
  std::size_t network_weight_factors = 0;
  std::size_t spin_factors = 0;
  bool network_multilinear = false;
  bool spin_multilinear = false;
  bool match = false;
  std::string network_example;
  std::string spin_example;
};

MonomialShapeReport monomial_shape_report(std::size_t depth, std::size_t p, std::uint64_t seed = 0);

}  // namespace carvelab
