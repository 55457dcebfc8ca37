#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "carvelab/error.hpp"

namespace carvelab {

/// Exponent vector (multi-index) of one monomial; length equals nvars.
using MultiIndex = std::vector<std::uint32_t>;

inline std::uint32_t total_degree(const MultiIndex& alpha) {
  std::uint32_t s = 0;
  for (auto a : alpha) s += a;
  return s;
}

/// Sparse polynomial: multi-index -> coefficient, zero coefficients never stored.
template <typename T>
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, T>;

  explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const T& c) {
    Polynomial p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t index) {
    MultiIndex alpha(nvars, 0);
    alpha.at(index) = 1;
    Polynomial p(nvars);
    p.add_term(std::move(alpha), T(1));
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [alpha, c] : terms_) d = std::max(d, total_degree(alpha));
    return d;
  }

  T coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? T(0) : it->second;
  }

  void add_term(MultiIndex alpha, const T& c) {
    if (alpha.size() != nvars_) throw DimensionMismatch("monomial arity does not match polynomial");
    if (c == T(0)) return;
    auto [it, inserted] = terms_.try_emplace(std::move(alpha), c);
    if (!inserted) {
      it->second += c;
      if (it->second == T(0)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [alpha, c] : o.terms_) add_term(alpha, -c);
    return *this;
  }
  Polynomial& operator*=(const T& s) {
    if (s == T(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [alpha, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const T& s) { return a *= s; }
  friend Polynomial operator*(const T& s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= T(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial out(a.nvars_);
    MultiIndex alpha(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = ea[k] + eb[k];
        out.add_term(alpha, ca * cb);
      }
    }
    return out;
  }

  bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  /// Evaluate at a point whose scalar type may differ from T (e.g. double
  /// points on a Rational polynomial via `convert`).
  template <typename U, typename Convert>
  U evaluate_with(std::span<const U> x, Convert&& convert) const {
    if (x.size() != nvars_) throw DimensionMismatch("evaluation point arity does not match polynomial");
    U total = U(0);
    for (const auto& [alpha, c] : terms_) {
      U term = convert(c);
      for (std::size_t k = 0; k < nvars_; ++k)
        for (std::uint32_t e = 0; e < alpha[k]; ++e) term *= x[k];
      total += term;
    }
    return total;
  }

  T evaluate(std::span<const T> x) const {
    return evaluate_with<T>(x, [](const T& c) { return c; });
  }

  Polynomial derivative(std::size_t var) const {
    Polynomial out(nvars_);
    for (const auto& [alpha, c] : terms_) {
      if (alpha[var] == 0) continue;
      MultiIndex beta = alpha;
      const T factor(static_cast<long>(beta[var]));
      --beta[var];
      out.add_term(std::move(beta), c * factor);
    }
    return out;
  }

  std::vector<Polynomial> gradient() const {
    std::vector<Polynomial> g;
    g.reserve(nvars_);
    for (std::size_t k = 0; k < nvars_; ++k) g.push_back(derivative(k));
    return g;
  }

  /// Hessian as symbolic polynomials, row-major nvars x nvars.
  std::vector<Polynomial> hessian() const {
    std::vector<Polynomial> h;
    h.reserve(nvars_ * nvars_);
    const auto g = gradient();
    for (std::size_t i = 0; i < nvars_; ++i)
      for (std::size_t j = 0; j < nvars_; ++j) h.push_back(g[i].derivative(j));
    return h;
  }

  template <typename U, typename Convert>
  Polynomial<U> cast(Convert&& convert) const {
    Polynomial<U> out(nvars_);
    for (const auto& [alpha, c] : terms_) out.add_term(alpha, convert(c));
    return out;
  }

  /// Human-readable form such as "3*x0^2*x1 + -1/2". Variable names default to x0, x1, ...
  template <typename Format>
  std::string str(Format&& format_coeff, const std::vector<std::string>& names = {}) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!first) os << " + ";
      first = false;
      os << format_coeff(it->second);
      for (std::size_t k = 0; k < nvars_; ++k) {
        if (it->first[k] == 0) continue;
        os << '*' << (k < names.size() ? names[k] : "x" + std::to_string(k));
        if (it->first[k] > 1) os << '^' << it->first[k];
      }
    }
    return os.str();
  }

 private:
  void check(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw DimensionMismatch("polynomials have different variable counts");
  }

  std::size_t nvars_;
  Terms terms_;
};

}  // namespace carvelab
