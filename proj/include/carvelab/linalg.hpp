#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace carvelab {

/// Dense real symmetric matrix. Writes go to both (i, j) and (j, i), so
/// symmetry holds by construction.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(std::size_t n = 0) : n_(n), data_(n * n, 0.0) {}

  /// Throws NonSymmetric unless rows[i][j] == rows[j][i] within `tolerance`
  /// (absolute); the stored matrix is the symmetrised average.
  static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows, double tolerance = 0.0);
  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix diagonal(std::span<const double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> multiply(std::span<const double> v) const;
  double quadratic_form(std::span<const double> v) const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

struct Spectrum {
  std::vector<double> eigenvalues;                ///< descending
  std::vector<std::vector<double>> eigenvectors;  ///< eigenvectors[k] pairs with eigenvalues[k]
  double tau = 0.0;                               ///< zero tolerance used
  std::size_t index_count = 0;                    ///< eigenvalues < -tau
  double index_fraction = 0.0;
  std::size_t degenerate_count = 0;               ///< |eigenvalue| <= tau
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// 1e-12 (relative to the matrix norm when that exceeds 1). Without `tau`
/// the tolerance is 1e-9 * max |lambda|.
Spectrum spectrum(const SymmetricMatrix& m, std::optional<double> tau = std::nullopt);

enum class CriticalClass { LocalMin, LocalMax, Saddle, Degenerate };
std::string_view class_name(CriticalClass c);

CriticalClass classify_critical_point(const Spectrum& s);

/// 1/2 d^T M d for a unit direction; throws NonUnitDirection otherwise.
double taylor_step_gain(const SymmetricMatrix& m, std::span<const double> direction);

/// Orthonormalises `vectors` in place by modified Gram-Schmidt, dropping any
/// vector whose residual norm falls below `drop`.
void gram_schmidt(std::vector<std::vector<double>>& vectors, double drop = 1e-10);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace carvelab
