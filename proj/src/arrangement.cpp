#include "carvelab/arrangement.hpp"

#include <algorithm>
#include <functional>

#include "carvelab/error.hpp"
#include "carvelab/lp.hpp"

namespace carvelab {

std::string SignVector::str() const {
  std::string s;
  for (auto v : signs) s.push_back(v == Side::Positive ? '+' : '-');
  return s;
}

BigInt region_count_formula(std::uint64_t n, std::uint64_t d) {
  BigInt total = 0;
  BigInt binom = 1;  // C(n, k)
  for (std::uint64_t k = 0; k <= std::min(n, d); ++k) {
    total += binom;
    binom = binom * (n - k) / (k + 1);
  }
  return total;
}

BigInt layerwise_upper_bound(std::span<const std::size_t> widths, std::uint64_t d) {
  BigInt product = 1;
  for (auto w : widths) product *= region_count_formula(w, d);
  return product;
}

namespace {

/// Determinant by fraction-exact Gaussian elimination.
Rational determinant(std::vector<std::vector<Rational>> m) {
  const std::size_t n = m.size();
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot][col] == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      const Rational f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

std::size_t rank(std::vector<std::vector<Rational>> m) {
  std::size_t r = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t col = 0; col < cols && r < m.size(); ++col) {
    std::size_t pivot = r;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[r]);
    for (std::size_t i = r + 1; i < m.size(); ++i) {
      if (m[i][col] == 0) continue;
      const Rational f = m[i][col] / m[r][col];
      for (std::size_t c = col; c < cols; ++c) m[i][c] -= f * m[r][c];
    }
    ++r;
  }
  return r;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

Rational evaluate(const Hyperplane& h, std::span<const Rational> x) {
  Rational v = h.offset;
  for (std::size_t j = 0; j < x.size(); ++j) v += h.normal[j] * x[j];
  return v;
}

void check_planes(const std::vector<Hyperplane>& planes, std::size_t dim) {
  for (const auto& h : planes) {
    if (h.normal.size() != dim) throw DimensionMismatch("hyperplane normal has the wrong dimension");
    if (std::all_of(h.normal.begin(), h.normal.end(), [](const Rational& v) { return v == 0; }))
      throw DimensionMismatch("hyperplane normal is the zero vector");
  }
}

}  // namespace

bool in_general_position(const std::vector<Hyperplane>& planes) {
  if (planes.empty()) return true;
  const std::size_t d = planes.front().normal.size();
  const std::size_t n = planes.size();
  bool ok = true;
  if (n <= d) {
    std::vector<std::vector<Rational>> m;
    for (const auto& h : planes) m.push_back(h.normal);
    return rank(m) == n;
  }
  for_each_subset(n, d, [&](const std::vector<std::size_t>& s) {
    if (!ok) return;
    std::vector<std::vector<Rational>> m;
    for (auto i : s) m.push_back(planes[i].normal);
    if (determinant(m) == 0) ok = false;
  });
  if (!ok) return false;
  for_each_subset(n, d + 1, [&](const std::vector<std::size_t>& s) {
    if (!ok) return;
    std::vector<std::vector<Rational>> m;
    for (auto i : s) {
      auto row = planes[i].normal;
      row.push_back(planes[i].offset);
      m.push_back(std::move(row));
    }
    if (determinant(m) == 0) ok = false;
  });
  return ok;
}

Box enclosing_box(const std::vector<Hyperplane>& planes, std::size_t dim) {
  Rational extent = 1;
  const std::size_t n = planes.size();
  if (n >= dim) {
    for_each_subset(n, dim, [&](const std::vector<std::size_t>& s) {
      std::vector<std::vector<Rational>> m;
      for (auto i : s) m.push_back(planes[i].normal);
      const Rational det = determinant(m);
      if (det == 0) return;
      // Cramer's rule for normal . x = -offset.
      for (std::size_t j = 0; j < dim; ++j) {
        auto mj = m;
        for (std::size_t r = 0; r < dim; ++r) mj[r][j] = -planes[s[r]].offset;
        Rational xj = determinant(mj) / det;
        if (xj < 0) xj = -xj;
        if (xj + 1 > extent) extent = xj + 1;
      }
    });
  }
  if (n > 0 && n < dim) {
    // Every cell touches the common flat; include its least-norm point,
    // x = N^T lambda with (N N^T) lambda = -offsets.
    std::vector<std::vector<Rational>> g(n, std::vector<Rational>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < dim; ++k) g[i][j] += planes[i].normal[k] * planes[j].normal[k];
      g[i][n] = -planes[i].offset;
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      while (piv < n && g[piv][col] == 0) ++piv;
      if (piv == n) return Box::cube(dim, extent * 2);
      std::swap(g[piv], g[col]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col || g[r][col] == 0) continue;
        const Rational f = g[r][col] / g[col][col];
        for (std::size_t c = col; c <= n; ++c) g[r][c] -= f * g[col][c];
      }
    }
    for (std::size_t k = 0; k < dim; ++k) {
      Rational xk = 0;
      for (std::size_t i = 0; i < n; ++i) xk += planes[i].normal[k] * g[i][n] / g[i][i];
      if (xk < 0) xk = -xk;
      if (xk + 1 > extent) extent = xk + 1;
    }
  }
  return Box::cube(dim, extent * 2);
}

Box default_arrangement_box(std::size_t dim) { return Box::cube(dim, Rational(1000)); }

namespace {

std::vector<ArrangementCell> enumerate_2d(const std::vector<Hyperplane>& planes, const Box& box) {
  std::vector<ArrangementCell> cells(1);
  cells[0].polygon = box_polygon(box);
  for (const auto& h : planes) {
    std::vector<ArrangementCell> next;
    next.reserve(cells.size() * 2);
    for (auto& cell : cells) {
      auto parts = split_polygon(cell.polygon, h.normal[0], h.normal[1], h.offset);
      if (!parts.positive.empty()) {
        ArrangementCell c{cell.signs, {}, std::move(parts.positive)};
        c.signs.signs.push_back(Side::Positive);
        next.push_back(std::move(c));
      }
      if (!parts.negative.empty()) {
        ArrangementCell c{cell.signs, {}, std::move(parts.negative)};
        c.signs.signs.push_back(Side::Negative);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  for (auto& c : cells) {
    const auto p = vertex_centroid(c.polygon);
    c.interior_point = {p.x, p.y};
  }
  return cells;
}

std::vector<ArrangementCell> enumerate_lp(const std::vector<Hyperplane>& planes, const Box& box) {
  const std::size_t dim = box.dim();
  std::vector<ArrangementCell> cells(1);
  {
    // Box centre.
    for (std::size_t j = 0; j < dim; ++j) cells[0].interior_point.push_back((box.lo[j] + box.hi[j]) / 2);
  }
  for (std::size_t k = 0; k < planes.size(); ++k) {
    const auto& h = planes[k];
    std::vector<ArrangementCell> next;
    next.reserve(cells.size() * 2);
    for (auto& cell : cells) {
      // Constraints of the cell so far, oriented so each row must be > 0.
      std::vector<std::vector<Rational>> rows;
      std::vector<Rational> consts;
      for (std::size_t i = 0; i < k; ++i) {
        const Rational s = cell.signs.signs[i] == Side::Positive ? 1 : -1;
        std::vector<Rational> row(dim);
        for (std::size_t j = 0; j < dim; ++j) row[j] = s * planes[i].normal[j];
        rows.push_back(std::move(row));
        consts.push_back(s * planes[i].offset);
      }
      const Rational at_witness = evaluate(h, cell.interior_point);
      for (Side side : {Side::Positive, Side::Negative}) {
        const Rational s = side == Side::Positive ? 1 : -1;
        std::vector<Rational> point;
        if (s * at_witness > 0) {
          point = cell.interior_point;
        } else {
          auto r = rows;
          auto c = consts;
          std::vector<Rational> row(dim);
          for (std::size_t j = 0; j < dim; ++j) row[j] = s * h.normal[j];
          r.push_back(std::move(row));
          c.push_back(s * h.offset);
          auto sol = max_margin(r, c, box.lo, box.hi);
          if (!(sol.margin > 0)) continue;
          point = std::move(sol.point);
        }
        ArrangementCell child{cell.signs, std::move(point), {}};
        child.signs.signs.push_back(side);
        next.push_back(std::move(child));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace

std::vector<ArrangementCell> enumerate_cells(const std::vector<Hyperplane>& planes, const Box& box) {
  box.validate();
  check_planes(planes, box.dim());
  auto cells = box.dim() == 2 ? enumerate_2d(planes, box) : enumerate_lp(planes, box);
  std::sort(cells.begin(), cells.end(),
            [](const ArrangementCell& a, const ArrangementCell& b) { return a.signs < b.signs; });
  return cells;
}

std::vector<SignVector> enumerate_regions(const std::vector<Hyperplane>& planes, const Box& box) {
  std::vector<SignVector> out;
  for (auto& c : enumerate_cells(planes, box)) out.push_back(std::move(c.signs));
  return out;
}

}  // namespace carvelab
