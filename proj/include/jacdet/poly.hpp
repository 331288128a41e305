#pragma once

// Exact bivariate polynomial calculus. Derivatives are coefficient shifts, so
// mixed partials commute bit-identically and every identity check below sees
// only rounding error, never discretization error.

#include <cmath>
#include <random>
#include <vector>

#include "jacdet/core.hpp"

namespace jacdet {

class PolyField {
 public:
  static constexpr int kMaxTotalDegree = 8;

  PolyField() : n_(1), c_(1, 0.0) {}

  /// c[i][j] multiplies x^i y^j; the matrix is (deg+1) x (deg+1) row-major in i.
  explicit PolyField(const std::vector<std::vector<double>>& coeffs) {
    n_ = static_cast<int>(coeffs.size());
    if (n_ == 0) {
      n_ = 1;
      c_.assign(1, 0.0);
      return;
    }
    c_.assign(static_cast<size_t>(n_) * static_cast<size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < static_cast<int>(coeffs[static_cast<size_t>(i)].size()); ++j)
        at(i, j) = coeffs[static_cast<size_t>(i)][static_cast<size_t>(j)];
    check_degree();
  }

  static PolyField zero() { return PolyField(); }

  static PolyField monomial(int i, int j, double coeff) {
    PolyField p;
    p.n_ = std::max(i, j) + 1;
    p.c_.assign(static_cast<size_t>(p.n_) * static_cast<size_t>(p.n_), 0.0);
    p.at(i, j) = coeff;
    p.check_degree();
    return p;
  }

  /// Coefficients uniform in [-1,1] over total degree <= deg.
  static PolyField random(int deg, std::mt19937_64& rng) {
    if (deg < 0 || deg > kMaxTotalDegree) throw config_error("PolyField: bad degree");
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    PolyField p;
    p.n_ = deg + 1;
    p.c_.assign(static_cast<size_t>(p.n_) * static_cast<size_t>(p.n_), 0.0);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; j <= deg - i; ++j) p.at(i, j) = uni(rng);
    return p;
  }

  /// Random harmonic polynomial: combination of Re(x+iy)^k, Im(x+iy)^k, k <= deg.
  static PolyField random_harmonic(int deg, std::mt19937_64& rng) {
    if (deg < 1 || deg > kMaxTotalDegree) throw config_error("PolyField: bad degree");
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    PolyField p;
    for (int k = 1; k <= deg; ++k) {
      auto [re, im] = harmonic_pair(k);
      p = p + re * uni(rng) + im * uni(rng);
    }
    return p;
  }

  int size() const { return n_; }
  double coeff(int i, int j) const {
    return (i < n_ && j < n_) ? c_[static_cast<size_t>(i) * static_cast<size_t>(n_) +
                                   static_cast<size_t>(j)]
                              : 0.0;
  }

  double operator()(double x, double y) const {
    // Horner in x of Horner-in-y row polynomials.
    double acc = 0.0;
    for (int i = n_ - 1; i >= 0; --i) {
      double row = 0.0;
      for (int j = n_ - 1; j >= 0; --j) row = row * y + coeff(i, j);
      acc = acc * x + row;
    }
    return acc;
  }
  double operator()(const Vec2& v) const { return (*this)(v.x, v.y); }

  PolyField dx() const {
    PolyField p;
    p.n_ = n_;
    p.c_.assign(static_cast<size_t>(n_) * static_cast<size_t>(n_), 0.0);
    for (int i = 1; i < n_; ++i)
      for (int j = 0; j < n_; ++j) p.at(i - 1, j) = static_cast<double>(i) * coeff(i, j);
    return p;
  }

  PolyField dy() const {
    PolyField p;
    p.n_ = n_;
    p.c_.assign(static_cast<size_t>(n_) * static_cast<size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 1; j < n_; ++j) p.at(i, j - 1) = static_cast<double>(j) * coeff(i, j);
    return p;
  }

  PolyField operator+(const PolyField& o) const {
    PolyField p;
    p.n_ = std::max(n_, o.n_);
    p.c_.assign(static_cast<size_t>(p.n_) * static_cast<size_t>(p.n_), 0.0);
    for (int i = 0; i < p.n_; ++i)
      for (int j = 0; j < p.n_; ++j) p.at(i, j) = coeff(i, j) + o.coeff(i, j);
    return p;
  }

  PolyField operator*(double s) const {
    PolyField p = *this;
    for (double& v : p.c_) v *= s;
    return p;
  }

  PolyField operator*(const PolyField& o) const {
    PolyField p;
    p.n_ = n_ + o.n_ - 1;
    p.c_.assign(static_cast<size_t>(p.n_) * static_cast<size_t>(p.n_), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double cij = coeff(i, j);
        if (cij == 0.0) continue;
        for (int k = 0; k < o.n_; ++k)
          for (int l = 0; l < o.n_; ++l) p.at(i + k, j + l) += cij * o.coeff(k, l);
      }
    p.check_degree();
    return p;
  }

  // Bundled exact jet evaluations, used all over the identity engine.
  Vec2 grad(const Vec2& x) const { return {dx()(x), dy()(x)}; }

  Sym2 hess(const Vec2& x) const {
    PolyField px = dx(), py = dy();
    return {px.dx()(x), px.dy()(x), py.dy()(x)};
  }

  struct Jet3 {
    double v;
    Vec2 g;
    Sym2 h;
    double vxxx, vxxy, vxyy, vyyy;
  };

  Jet3 jet3(const Vec2& x) const {
    PolyField px = dx(), py = dy();
    PolyField pxx = px.dx(), pxy = px.dy(), pyy = py.dy();
    Jet3 out;
    out.v = (*this)(x);
    out.g = {px(x), py(x)};
    out.h = {pxx(x), pxy(x), pyy(x)};
    out.vxxx = pxx.dx()(x);
    out.vxxy = pxx.dy()(x);
    out.vxyy = pxy.dy()(x);
    out.vyyy = pyy.dy()(x);
    return out;
  }

 private:
  double& at(int i, int j) {
    return c_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)];
  }

  void check_degree() const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (coeff(i, j) != 0.0 && i + j > kMaxTotalDegree)
          throw config_error("PolyField: total degree exceeds 8");
  }

  static std::pair<PolyField, PolyField> harmonic_pair(int k) {
    // (x+iy)^k expanded by the binomial theorem.
    PolyField re, im;
    double binom = 1.0;
    for (int m = 0; m <= k; ++m) {
      // i^m cycles 1, i, -1, -i.
      double c = binom;
      switch (m & 3) {
        case 0: re = re + monomial(k - m, m, c); break;
        case 1: im = im + monomial(k - m, m, c); break;
        case 2: re = re + monomial(k - m, m, -c); break;
        case 3: im = im + monomial(k - m, m, -c); break;
      }
      binom = binom * static_cast<double>(k - m) / static_cast<double>(m + 1);
    }
    return {re, im};
  }

  int n_ = 1;
  std::vector<double> c_;
};

inline PolyField operator*(double s, const PolyField& p) { return p * s; }

}  // namespace jacdet
