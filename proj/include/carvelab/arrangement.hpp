#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "carvelab/geometry.hpp"
#include "carvelab/rational.hpp"

namespace carvelab {

/// The affine hyperplane {x : normal . x + offset = 0}.
struct Hyperplane {
  std::vector<Rational> normal;
  Rational offset;
};

enum class Side : std::int8_t { Negative = -1, Positive = 1 };

/// Side of every hyperplane for one open cell of an arrangement.
struct SignVector {
  std::vector<Side> signs;

  std::string str() const;
  bool operator==(const SignVector&) const = default;
  auto operator<=>(const SignVector&) const = default;
};

/// r(n, d) = sum_{k=0}^{min(n,d)} C(n, k): the number of regions cut out of
/// R^d by n hyperplanes in general position.
BigInt region_count_formula(std::uint64_t n, std::uint64_t d);

/// Product of r(n_i, d) over the layer widths.
BigInt layerwise_upper_bound(std::span<const std::size_t> widths, std::uint64_t d);

/// Every subset of at most d normals is linearly independent and no d + 1
/// hyperplanes share a point.
bool in_general_position(const std::vector<Hyperplane>& planes);

/// A box strictly containing every vertex (intersection of d hyperplanes in
/// general position), so each cell of the arrangement meets it.
Box enclosing_box(const std::vector<Hyperplane>& planes, std::size_t dim);

struct ArrangementCell {
  SignVector signs;
  std::vector<Rational> interior_point;  ///< strictly inside the cell and the box
  Polygon polygon;                       ///< exact cell clipped to the box (d = 2 only)
};

/// Exact incremental enumeration of the open cells meeting the open box.
/// Cells are exact polygons for d = 2 and interior-point certificates from an
/// exact max-margin LP otherwise. Sorted by sign vector.
std::vector<ArrangementCell> enumerate_cells(const std::vector<Hyperplane>& planes, const Box& box);

std::vector<SignVector> enumerate_regions(const std::vector<Hyperplane>& planes, const Box& box);

/// Default bounding box [-1000, 1000]^d.
Box default_arrangement_box(std::size_t dim);

}  // namespace carvelab
