#pragma once

// Second-order difference stencils on uniform grids: central in the interior,
// one-sided on the boundary ring. Exact on quadratics at every node.

#include "jacdet/grid.hpp"

namespace jacdet {

namespace detail {

/// d/dx along a row-major line: f(k) indexed by k in [0, n], spacing h.
template <class At>
inline double d1_line(const At& f, int k, int n, double h) {
  if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  if (k == n) return (3.0 * f(n) - 4.0 * f(n - 1) + f(n - 2)) / (2.0 * h);
  return (f(k + 1) - f(k - 1)) / (2.0 * h);
}

/// d2/dx2 along a line, compact interior / one-sided at the ends.
template <class At>
inline double d2_line(const At& f, int k, int n, double h) {
  if (k == 0) return (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (h * h);
  if (k == n) return (2.0 * f(n) - 5.0 * f(n - 1) + 4.0 * f(n - 2) - f(n - 3)) / (h * h);
  return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (h * h);
}

}  // namespace detail

/// Discrete gradient of a node field.
inline VectorField gradient(const ScalarField& f) {
  const GridSpec& g = f.grid();
  std::vector<double> gx(g.node_count()), gy(g.node_count());
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      auto fx = [&](int k) { return f(k, j); };
      auto fy = [&](int k) { return f(i, k); };
      gx[g.index(i, j)] = detail::d1_line(fx, i, g.nx, g.hx);
      gy[g.index(i, j)] = detail::d1_line(fy, j, g.ny, g.hy);
    }
  }
  return VectorField(g, std::move(gx), std::move(gy));
}

struct HessianField {
  ScalarField xx;
  ScalarField xy;
  ScalarField yy;
  Sym2 operator()(int i, int j) const { return {xx(i, j), xy(i, j), yy(i, j)}; }
};

/// Discrete Hessian. The mixed derivative is taken as d/dx of the discrete
/// d/dy field so the boundary ring stays second order.
inline HessianField hessian(const ScalarField& f) {
  const GridSpec& g = f.grid();
  std::vector<double> hxx(g.node_count()), hyy(g.node_count());
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      auto fx = [&](int k) { return f(k, j); };
      auto fy = [&](int k) { return f(i, k); };
      hxx[g.index(i, j)] = detail::d2_line(fx, i, g.nx, g.hx);
      hyy[g.index(i, j)] = detail::d2_line(fy, j, g.ny, g.hy);
    }
  }
  VectorField grad = gradient(f);
  std::vector<double> hxy(g.node_count());
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      auto gyx = [&](int k) { return grad(k, j).y; };
      hxy[g.index(i, j)] = detail::d1_line(gyx, i, g.nx, g.hx);
    }
  }
  return HessianField{ScalarField(g, std::move(hxx)), ScalarField(g, std::move(hxy)),
                      ScalarField(g, std::move(hyy))};
}

}  // namespace jacdet
