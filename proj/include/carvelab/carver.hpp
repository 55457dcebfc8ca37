#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "carvelab/geometry.hpp"
#include "carvelab/netspec.hpp"
#include "carvelab/polynomial.hpp"
#include "carvelab/rational.hpp"

namespace carvelab {

/// f(x) = coefficients . x + constant.
struct AffineFunction {
  std::vector<Rational> coefficients;
  Rational constant;

  static AffineFunction zero(std::size_t dim) { return {std::vector<Rational>(dim), Rational(0)}; }
  static AffineFunction coordinate(std::size_t dim, std::size_t k);

  bool is_constant() const;
  Rational evaluate(std::span<const Rational> x) const;
  double evaluate(std::span<const double> x) const;

  /// this += weight * other
  void add_scaled(const AffineFunction& other, const Rational& weight);

  bool operator==(const AffineFunction&) const = default;
};

/// One linear region of a pure relu network.
struct CarvedRegion {
  ActivationPattern pattern;
  Polygon polygon;                       ///< d = 2: exact convex cell, CCW
  std::vector<Rational> interior_point;  ///< strictly inside the cell
  bool clipped = false;                  ///< cell touches the carving box boundary
  /// Output neuron id -> affine function on this cell. For a sigmoid output
  /// this is its logit (preactivation).
  std::map<std::string, AffineFunction> functions;
};

/// Chord of a relu neuron's zero line inside the cell it cut.
struct BendSegment {
  std::size_t neuron = 0;
  std::size_t layer = 0;
  Point2 from;
  Point2 to;
};

struct Carving {
  Box box;
  std::vector<CarvedRegion> regions;  ///< sorted by pattern
  std::vector<BendSegment> bends;     ///< in cut order
  /// Region count after all neurons of layer 1, 2, ... have cut.
  std::vector<std::size_t> counts_after_layer;
};

struct CarveOptions {
  /// Coordinates needing more bits than this raise ExactArithmeticOverflow.
  std::size_t max_bits = 1u << 14;
};

/// Exact layer-by-layer carving of the 2-D input box. Neurons are visited in
/// a topological order sorted by layer; each relu neuron splits every current
/// cell by the zero line of its affine preactivation on that cell.
Carving carve_exact_2d(const Network& net, const Box& box, const CarveOptions& options = {});

/// The neurons visited by the carving, in the order they cut.
std::vector<std::size_t> layered_order(const Network& net);

enum class LpMode { Float, Exact };

struct PatternWitness {
  ActivationPattern pattern;
  std::vector<double> point;          ///< interior witness
  std::vector<Rational> exact_point;  ///< filled in Exact mode
};

struct SignvectorOptions {
  LpMode mode = LpMode::Float;
  double epsilon = 1e-9;
  /// When false, an ambiguous float margin throws SolverTolerance instead of
  /// being settled by an exact LP.
  bool verify_exact = true;
};

/// All activation patterns whose open cell meets the box, for any input
/// dimension, by depth-first feasibility search with one max-margin LP per
/// undecided branch. Sorted by pattern.
std::vector<PatternWitness> carve_signvectors(const Network& net, const Box& box,
                                              const SignvectorOptions& options = {});

/// Per-output affine functions for a (possibly hypothetical) pattern.
/// Sigmoid outputs yield their logit. Throws UnsupportedNeuron for mul neurons.
std::map<std::string, AffineFunction> region_function(const Network& net, const ActivationPattern& pattern);

/// Per-neuron polynomial in the inputs under a fixed pattern (mul neurons
/// multiply their operands' polynomials; sigmoid neurons yield their logit).
std::vector<Polynomial<Rational>> neuron_polynomials(const Network& net, const ActivationPattern& pattern);

enum class Decision { Cat, Dog, Indecision };
std::string_view decision_name(Decision d);

struct DecisionPiece {
  std::size_t region = 0;  ///< index into the input region list
  Decision label = Decision::Indecision;
  Polygon polygon;
};

struct DecisionPartition {
  std::vector<DecisionPiece> pieces;
};

/// Splits every region along the lines where its logit equals
/// ln(T/(1-T)) for T1 and T2: Cat above T1, Dog below T2, Indecision
/// between. Requires 0 < T2 < T1 < 1.
DecisionPartition decision_partition(const std::vector<CarvedRegion>& regions, double t1, double t2,
                                     const std::string& output_id = {});

/// Structural degree of every neuron's function of the input: inputs 1,
/// weighted sums keep the maximum, mul adds its operands' degrees.
std::map<std::string, unsigned> polynomial_degree(const Network& net);

struct PolynomialCell {
  ActivationPattern pattern;
  std::vector<std::array<double, 2>> samples;  ///< points observed in the cell
  bool grid_witnessed = true;                  ///< false if only refinement found it
  std::map<std::string, Polynomial<Rational>> functions;  ///< every non-input neuron
};

struct PolynomialCarveOptions {
  std::size_t grid = 200;        ///< samples per axis
  std::size_t refine_depth = 30; ///< bisection depth between disagreeing neighbours
  /// Throw ResolutionTooCoarse when a cell is only found by refinement.
  bool strict = false;
};

/// Sampling-based carving for networks with mul neurons (2-D input): grid
/// labelling plus bisection along disagreeing neighbours, then the exact
/// symbolic polynomial per discovered pattern.
std::vector<PolynomialCell> carve_polynomial(const Network& net, const Box& box,
                                             const PolynomialCarveOptions& options = {});

using Polyline = std::vector<std::array<double, 2>>;

/// Marching-squares contour of value(x, y) = c over the squares of a
/// grid x grid lattice whose four corners satisfy `inside`. Crossings are
/// refined on the true function by bisection.
std::vector<Polyline> trace_level_set(const std::function<double(double, double)>& value,
                                      const std::function<bool(double, double)>& inside, const Box& box,
                                      double c, std::size_t grid);

/// Contour of `neuron`'s polynomial for `pattern` restricted to that pattern's cell.
std::vector<Polyline> trace_level_set(const Network& net, const std::string& neuron,
                                      const ActivationPattern& pattern, double c, const Box& box,
                                      std::size_t grid);

/// Hand-built network whose first L-1 relu layers fold each input coordinate
/// into n/d sawtooth pieces and whose last relu layer cuts the folded unit
/// cube with n generic hyperplanes. Intended input domain is [0, 1]^d.
Network build_folding_network(std::size_t n, std::size_t d, std::size_t layers);

/// Adds an unused second input so a 1-D network can be carved as a 2-D strip.
Network embed_strip(const Network& net);

}  // namespace carvelab
