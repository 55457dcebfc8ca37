#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "carvelab/linalg.hpp"
#include "carvelab/netspec.hpp"
#include "carvelab/polynomial.hpp"
#include "carvelab/rng.hpp"

namespace carvelab {

/// One learnable parameter: an incoming edge weight or a bias.
struct ParameterInfo {
  std::string name;  ///< "w:src->dst" or "b:dst"
  std::size_t neuron = 0;
  std::size_t edge = Network::npos;  ///< index into inputs_of(neuron); npos for the bias
};

/// Parameters in declaration order: for every non-input, non-mul neuron its
/// incoming weights (in edge order) followed by its bias.
std::vector<ParameterInfo> parameter_layout(const Network& net);
std::vector<double> parameters_of(const Network& net);
/// Copy of `net` with the parameters replaced (converted exactly to rationals).
Network with_parameters(const Network& net, std::span<const double> theta);

struct Sample {
  std::vector<double> x;
  double target = 0.0;  ///< G
};
using Batch = std::vector<Sample>;

/// Reads "x0,...,x{d-1},G" rows; '#' lines and one non-numeric header row are skipped.
Batch load_batch(const std::string& path, std::size_t input_dim);

/// Network output under parameters theta, with d(output)/d(theta).
/// `logit` selects the preactivation of a sigmoid output instead of its value.
struct OutputGradient {
  double value = 0.0;
  std::vector<double> gradient;
};
OutputGradient output_gradient(const Network& net, std::span<const double> theta, std::span<const double> x,
                               bool logit);

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Mean of (f - G)^2, f the network output.
LossResult loss_l2(const Network& net, const Batch& batch, std::span<const double> theta);
/// Mean of softplus(f) - G f with f the logit and p = sigmoid(f); the
/// gradient is mean (p - G) df/dtheta.
LossResult loss_xent(const Network& net, const Batch& batch, std::span<const double> theta);

enum class LossKind { L2, CrossEntropy };
LossResult evaluate_loss(LossKind kind, const Network& net, const Batch& batch, std::span<const double> theta);

/// Output (logit for a sigmoid output) as a polynomial in the parameters for
/// a fixed input x and pattern. Throws PatternUnrealizable when the
/// network's own parameters do not produce `pattern` at x.
Polynomial<double> parameter_polynomial(const Network& net, std::span<const double> x, const ActivationPattern& pattern);
Polynomial<double> parameter_polynomial(const Network& net, std::span<const double> x);

/// Mean squared error of a batch as one polynomial in the parameters, each
/// sample's pattern held at the one realised by `net` itself.
Polynomial<double> l2_loss_polynomial(const Network& net, const Batch& batch);

SymmetricMatrix hessian(const Polynomial<double>& p, std::span<const double> at);

struct HessianResult {
  SymmetricMatrix matrix;
  /// Some relu preactivation is within the probe step of zero, so the
  /// second differences may straddle an activation flip.
  bool boundary = false;
};

/// Central second differences of f with step h, symmetrised.
SymmetricMatrix hessian_fd(const std::function<double(std::span<const double>)>& f, std::span<const double> at,
                           double h = 1e-4);

enum class HessianMode { Symbolic, FiniteDifference };

/// Loss Hessian for a network. Symbolic mode differentiates the L2 loss
/// polynomial exactly and is only available for LossKind::L2.
HessianResult loss_hessian(LossKind kind, const Network& net, const Batch& batch, std::span<const double> theta,
                           HessianMode mode, double h = 1e-4);

using LossFunction = std::function<double(std::span<const double>)>;
using LossWithGradient = std::function<LossResult(std::span<const double>)>;

struct CurvePoint {
  double alpha = 0.0;
  double loss = 0.0;
};

/// L((1 - a) theta0 + a thetaf) for `steps` values of a uniform on [0, 1].
std::vector<CurvePoint> interpolation_curve(const LossFunction& loss, std::span<const double> theta0,
                                            std::span<const double> thetaf, std::size_t steps);

/// Largest rise of the curve above the chord between its endpoints.
double max_interior_bump(const std::vector<CurvePoint>& curve);

struct PlaneSection {
  std::size_t grid = 0;
  double extent = 0.0;
  std::vector<double> coords;  ///< offsets along each direction
  std::vector<double> values;  ///< row-major: values[r * grid + c] at coords[c] * u + coords[r] * v
  std::vector<double> u;
  std::vector<double> v;
};

/// Loss on theta0 + a u + b v with (a, b) on a grid x grid lattice over
/// [-extent, extent]^2; u, v are Gaussian draws orthonormalised. For odd
/// grids the centre is theta0 itself.
PlaneSection plane_section(const LossFunction& loss, std::span<const double> theta0, std::size_t grid, double extent,
                           Rng& rng);

struct SubspaceResult {
  double final_loss = 0.0;
  std::vector<double> theta;
  std::vector<std::vector<double>> basis;  ///< dsub orthonormal vectors
  std::vector<double> losses;              ///< per iteration, before the step
};

/// Gradient descent on c in theta = theta0 + B c with B a fixed random
/// orthonormal basis of dimension dsub.
SubspaceResult subspace_descent(const LossWithGradient& loss, std::span<const double> theta0, std::size_t dsub,
                                std::size_t iters, double step, Rng& rng);

/// Plain fixed-step gradient descent with optional momentum.
std::vector<double> sgd(const LossWithGradient& loss, std::span<const double> theta0, std::size_t iters, double step,
                        double momentum = 0.0);

struct CriticalPoint {
  std::vector<double> point;
  double gradient_norm = 0.0;
  Spectrum spectrum;
  CriticalClass kind = CriticalClass::Degenerate;
};

struct CriticalSearchOptions {
  std::size_t starts = 200;
  double lo = -3.0;
  double hi = 3.0;
  double gradient_tolerance = 1e-10;
  double dedup_radius = 1e-6;
  std::size_t max_iterations = 200;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;  ///< sorted lexicographically by point
  std::size_t failed_starts = 0;      ///< starts that did not converge
};

/// Damped Newton (Levenberg-Marquardt on grad P = 0) from uniform random starts.
CriticalSearch find_critical_points(const Polynomial<double>& p, Rng& rng, const CriticalSearchOptions& options = {});

/// Flat evaluator for repeated evaluation of a fixed polynomial and its
/// derivatives.
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const Polynomial<double>& p);
  std::size_t nvars() const { return nvars_; }
  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::vector<double>& out) const;
  void hessian(std::span<const double> x, std::vector<double>& out) const;  ///< row-major

 private:
  std::size_t nvars_;
  std::uint32_t max_exp_;
  std::vector<double> coeffs_;
  std::vector<std::uint32_t> exps_;  ///< term-major, nvars_ per term
  void powers(std::span<const double> x, std::vector<double>& table) const;
};

}  // namespace carvelab
