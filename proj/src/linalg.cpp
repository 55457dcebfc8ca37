#include "carvelab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carvelab/error.hpp"

namespace carvelab {

SymmetricMatrix SymmetricMatrix::from_rows(const std::vector<std::vector<double>>& rows, double tolerance) {
  const std::size_t n = rows.size();
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw DimensionMismatch("matrix is not square");
    for (std::size_t j = 0; j <= i; ++j) {
      if (std::abs(rows[i][j] - rows[j][i]) > tolerance)
        throw NonSymmetric("entry (" + std::to_string(i) + "," + std::to_string(j) + ") differs from its transpose");
      m.set(i, j, i == j ? rows[i][i] : 0.5 * (rows[i][j] + rows[j][i]));
    }
  }
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> values) {
  SymmetricMatrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.set(i, i, values[i]);
  return m;
}

std::vector<double> SymmetricMatrix::multiply(std::span<const double> v) const {
  if (v.size() != n_) throw DimensionMismatch("vector length differs from matrix size");
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i] += data_[i * n_ + j] * v[j];
  return out;
}

double SymmetricMatrix::quadratic_form(std::span<const double> v) const {
  const auto mv = multiply(v);
  return dot(v, mv);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Spectrum spectrum(const SymmetricMatrix& m, std::optional<double> tau) {
  const std::size_t n = m.size();
  std::vector<double> a = m.data();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };
  double frob = 0.0;
  for (double x : a) frob += x * x;
  const double target = 1e-12 * std::max(1.0, std::sqrt(frob));

  for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        // tan of the rotation angle, smaller root for stability.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = theta == 0.0 ? 1.0
                                      : std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = a[p * n + k] = c * akp - s * akq;
          a[k * n + q] = a[q * n + k] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

  Spectrum s;
  double largest = 0.0;
  for (std::size_t k : idx) {
    s.eigenvalues.push_back(a[k * n + k]);
    std::vector<double> vec(n);
    for (std::size_t r = 0; r < n; ++r) vec[r] = v[r * n + k];
    s.eigenvectors.push_back(std::move(vec));
    largest = std::max(largest, std::abs(a[k * n + k]));
  }
  s.tau = tau.value_or(1e-9 * largest);
  for (double lambda : s.eigenvalues) {
    if (lambda < -s.tau) ++s.index_count;
    if (std::abs(lambda) <= s.tau) ++s.degenerate_count;
  }
  s.index_fraction = n == 0 ? 0.0 : static_cast<double>(s.index_count) / static_cast<double>(n);
  return s;
}

std::string_view class_name(CriticalClass c) {
  switch (c) {
    case CriticalClass::LocalMin: return "local-min";
    case CriticalClass::LocalMax: return "local-max";
    case CriticalClass::Saddle: return "saddle";
    case CriticalClass::Degenerate: return "degenerate";
  }
  return "?";
}

CriticalClass classify_critical_point(const Spectrum& s) {
  if (s.degenerate_count > 0 || s.eigenvalues.empty()) return CriticalClass::Degenerate;
  if (s.index_count == 0) return CriticalClass::LocalMin;
  if (s.index_count == s.eigenvalues.size()) return CriticalClass::LocalMax;
  return CriticalClass::Saddle;
}

double taylor_step_gain(const SymmetricMatrix& m, std::span<const double> direction) {
  if (direction.size() != m.size()) throw DimensionMismatch("direction length differs from matrix size");
  if (std::abs(norm(direction) - 1.0) > 1e-9) throw NonUnitDirection("direction must have unit length");
  return 0.5 * m.quadratic_form(direction);
}

void gram_schmidt(std::vector<std::vector<double>>& vectors, double drop) {
  std::vector<std::vector<double>> out;
  for (auto& v : vectors) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : out) {
        const double c = dot(v, u);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * u[k];
      }
    const double len = norm(v);
    if (len < drop) continue;
    for (auto& x : v) x /= len;
    out.push_back(std::move(v));
  }
  vectors = std::move(out);
}

}  // namespace carvelab
