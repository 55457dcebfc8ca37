#pragma once

#include <cstddef>
#include <vector>

#include "carvelab/rational.hpp"

namespace carvelab {

/// Maximise c^T x subject to A x <= b, x >= 0, with b >= 0 so the origin is
/// a feasible basis. Dense Tucker tableau with Bland's rule; exact when T is
/// Rational. Returns nullopt-like status through `bounded`.
template <typename T>
struct SimplexResult {
  bool bounded = true;
  T objective{};
  std::vector<T> x;
};

template <typename T>
SimplexResult<T> simplex_maximize(const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                                  const std::vector<T>& c);

/// Strict linear system rows[i] . x + constants[i] > 0 inside the open box
/// lo < x < hi. `margin` is the largest t (capped at 1) with every row and
/// every box face satisfied by at least t; the region is a nonempty open set
/// iff margin > 0, and `point` attains the margin.
template <typename T>
struct MarginResult {
  T margin{};
  std::vector<T> point;
};

template <typename T>
MarginResult<T> max_margin(const std::vector<std::vector<T>>& rows, const std::vector<T>& constants,
                           const std::vector<T>& lo, const std::vector<T>& hi);

extern template SimplexResult<double> simplex_maximize(const std::vector<std::vector<double>>&,
                                                       const std::vector<double>&, const std::vector<double>&);
extern template SimplexResult<Rational> simplex_maximize(const std::vector<std::vector<Rational>>&,
                                                         const std::vector<Rational>&,
                                                         const std::vector<Rational>&);
extern template MarginResult<double> max_margin(const std::vector<std::vector<double>>&,
                                                const std::vector<double>&, const std::vector<double>&,
                                                const std::vector<double>&);
extern template MarginResult<Rational> max_margin(const std::vector<std::vector<Rational>>&,
                                                  const std::vector<Rational>&, const std::vector<Rational>&,
                                                  const std::vector<Rational>&);

}  // namespace carvelab
