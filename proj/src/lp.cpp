#include "carvelab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "carvelab/error.hpp"

namespace carvelab {

namespace {

template <typename T>
T tolerance() {
  if constexpr (std::is_same_v<T, double>) return 1e-12;
  else return T(0);
}

template <typename T>
T absolute(const T& v) {
  return v < 0 ? T(-v) : v;
}

}  // namespace

template <typename T>
SimplexResult<T> simplex_maximize(const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                                  const std::vector<T>& c) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  const T eps = tolerance<T>();
  // Tableau rows 0..m-1 are [A | b]; row m is [-c | objective].
  std::vector<std::vector<T>> d(m + 1, std::vector<T>(n + 1));
  std::vector<std::size_t> basic(m), nonbasic(n);
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0) throw SolverTolerance("simplex_maximize requires b >= 0");
    for (std::size_t j = 0; j < n; ++j) d[i][j] = a[i][j];
    d[i][n] = b[i];
    basic[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[m][j] = -c[j];
    nonbasic[j] = j;
  }

  auto pivot = [&](std::size_t r, std::size_t s) {
    const T inv = T(1) / d[r][s];
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || d[i][s] == 0) continue;
      const T f = d[i][s] * inv;
      for (std::size_t j = 0; j <= n; ++j)
        if (j != s && d[r][j] != 0) d[i][j] -= d[r][j] * f;
      d[i][s] = -f;
    }
    for (std::size_t j = 0; j <= n; ++j)
      if (j != s) d[r][j] *= inv;
    d[r][s] = inv;
    std::swap(basic[r], nonbasic[s]);
  };

  SimplexResult<T> result;
  const std::size_t max_iter = 50 * (m + n + 10);
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iter) throw SolverTolerance("simplex iteration limit reached");
    // Bland: entering variable with the smallest index among improving columns.
    std::size_t s = n;
    for (std::size_t j = 0; j < n; ++j)
      if (d[m][j] < -eps && (s == n || nonbasic[j] < nonbasic[s])) s = j;
    if (s == n) break;
    std::size_t r = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(d[i][s] > eps)) continue;
      if (r == m) {
        r = i;
        continue;
      }
      // Ratio test b_i / d_is < b_r / d_rs, cross-multiplied (both pivots > 0).
      const T lhs = d[i][n] * d[r][s];
      const T rhs = d[r][n] * d[i][s];
      T tie = 0;
      if constexpr (std::is_same_v<T, double>) tie = eps * std::max({1.0, absolute(lhs), absolute(rhs)});
      if (lhs < rhs - tie || (absolute(lhs - rhs) <= tie && basic[i] < basic[r])) r = i;
    }
    if (r == m) {
      result.bounded = false;
      return result;
    }
    pivot(r, s);
  }
  result.objective = d[m][n];
  result.x.assign(n, T(0));
  for (std::size_t i = 0; i < m; ++i)
    if (basic[i] < n) result.x[basic[i]] = d[i][n];
  return result;
}

template <typename T>
MarginResult<T> max_margin(const std::vector<std::vector<T>>& rows, const std::vector<T>& constants,
                           const std::vector<T>& lo, const std::vector<T>& hi) {
  const std::size_t dim = lo.size();
  // Variables: y = x - lo >= 0 (dim entries), then s = t + shift >= 0.
  // Row form: -a.y + s <= a.lo + c + shift;  -y_j + s <= shift;
  //           y_j + s <= hi_j - lo_j + shift;  s <= 1 + shift.
  std::vector<T> rhs0;
  rhs0.reserve(rows.size());
  T shift = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    T v = constants[i];
    for (std::size_t j = 0; j < dim; ++j) v += rows[i][j] * lo[j];
    if (-v > shift) shift = -v;
    rhs0.push_back(std::move(v));
  }
  std::vector<std::vector<T>> a;
  std::vector<T> b;
  const std::size_t nv = dim + 1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<T> row(nv);
    for (std::size_t j = 0; j < dim; ++j) row[j] = -rows[i][j];
    row[dim] = 1;
    a.push_back(std::move(row));
    T r = rhs0[i] + shift;
    if (r < 0) r = 0;  // rounding guard in floating point
    b.push_back(std::move(r));
  }
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<T> lower(nv), upper(nv);
    lower[j] = -1;
    lower[dim] = 1;
    upper[j] = 1;
    upper[dim] = 1;
    a.push_back(std::move(lower));
    b.push_back(shift);
    a.push_back(std::move(upper));
    b.push_back(hi[j] - lo[j] + shift);
  }
  std::vector<T> cap(nv);
  cap[dim] = 1;
  a.push_back(std::move(cap));
  b.push_back(T(1) + shift);

  std::vector<T> objective(nv);
  objective[dim] = 1;
  const auto sol = simplex_maximize(a, b, objective);
  MarginResult<T> out;
  out.margin = sol.objective - shift;
  out.point.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) out.point[j] = sol.x[j] + lo[j];
  return out;
}

template SimplexResult<double> simplex_maximize(const std::vector<std::vector<double>>&,
                                                const std::vector<double>&, const std::vector<double>&);
template SimplexResult<Rational> simplex_maximize(const std::vector<std::vector<Rational>>&,
                                                  const std::vector<Rational>&, const std::vector<Rational>&);
template MarginResult<double> max_margin(const std::vector<std::vector<double>>&, const std::vector<double>&,
                                         const std::vector<double>&, const std::vector<double>&);
template MarginResult<Rational> max_margin(const std::vector<std::vector<Rational>>&,
                                           const std::vector<Rational>&, const std::vector<Rational>&,
                                           const std::vector<Rational>&);

}  // namespace carvelab
