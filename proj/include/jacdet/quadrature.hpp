#pragma once

// Quadrature: tensor-product trapezoid rule on grids (the workhorse behind
// every weak pairing) and polar rules on disks/annuli for the estimate suite.

#include <cmath>
#include <utility>
#include <vector>

#include "jacdet/bump.hpp"
#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"

namespace jacdet {

inline double trapezoid_weight(const GridSpec& g, int i, int j) {
  double wx = (i == 0 || i == g.nx) ? 0.5 : 1.0;
  double wy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
  return wx * wy * g.hx * g.hy;
}

/// Trapezoid integral of a node-indexed integrand fn(i, j).
template <class Fn>
inline double integrate_nodes(const GridSpec& g, Fn&& fn) {
  double total = 0.0;
  for (int j = 0; j <= g.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i <= g.nx; ++i) {
      double wx = (i == 0 || i == g.nx) ? 0.5 : 1.0;
      row += wx * fn(i, j);
    }
    total += ((j == 0 || j == g.ny) ? 0.5 : 1.0) * row;
  }
  return total * g.hx * g.hy;
}

inline double integrate(const ScalarField& f) {
  return integrate_nodes(f.grid(), [&](int i, int j) { return f(i, j); });
}

/// Integral of f * psi; the bump support must sit inside the grid rectangle.
inline double integrate(const ScalarField& f, const TestBump& psi) {
  const GridSpec& g = f.grid();
  if (!psi.supported_in(g))
    throw geometry_error("integrate: bump support escapes the grid rectangle");
  return integrate_nodes(g, [&](int i, int j) { return f(i, j) * psi.value(g.node(i, j)); });
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [-1, 1] (Newton on the Legendre recurrence).
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<size_t>(i)] = x;
    rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Polar quadrature over an annulus {r_in <= |x-c| <= r_out}: Gauss-Legendre
// radially, trapezoid (spectral for periodic integrands) in the angle.
// ---------------------------------------------------------------------------

struct PolarRule {
  Vec2 center{};
  double r_in = 0.0;
  double r_out = 0.0;
  int n_theta = 512;
  int n_radial = 32;

  /// integral of fn over the annulus, fn sampled at points (dA included).
  template <class Fn>
  double integrate(Fn&& fn) const {
    GaussRule gr = gauss_legendre(n_radial);
    const double dtheta = 2.0 * M_PI / n_theta;
    double total = 0.0;
    for (int it = 0; it < n_theta; ++it) {
      const double theta = it * dtheta;
      const double c = std::cos(theta), s = std::sin(theta);
      double line = 0.0;
      for (int ir = 0; ir < n_radial; ++ir) {
        double r = 0.5 * (r_out + r_in) + 0.5 * (r_out - r_in) * gr.nodes[static_cast<size_t>(ir)];
        double w = 0.5 * (r_out - r_in) * gr.weights[static_cast<size_t>(ir)];
        line += w * r * fn(Vec2{center.x + r * c, center.y + r * s});
      }
      total += line * dtheta;
    }
    return total;
  }

  /// max of fn over the sample points (sup realized as sample maximum).
  template <class Fn>
  double sample_max(Fn&& fn) const {
    GaussRule gr = gauss_legendre(n_radial);
    const double dtheta = 2.0 * M_PI / n_theta;
    double best = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < n_theta; ++it) {
      const double theta = it * dtheta;
      const double c = std::cos(theta), s = std::sin(theta);
      for (int ir = 0; ir < n_radial; ++ir) {
        double r = 0.5 * (r_out + r_in) + 0.5 * (r_out - r_in) * gr.nodes[static_cast<size_t>(ir)];
        best = std::max(best, fn(Vec2{center.x + r * c, center.y + r * s}));
      }
    }
    // Include the outer rim; suprema frequently live there.
    for (int it = 0; it < n_theta; ++it) {
      const double theta = it * dtheta;
      best = std::max(best, fn(Vec2{center.x + r_out * std::cos(theta),
                                    center.y + r_out * std::sin(theta)}));
    }
    return best;
  }
};

inline PolarRule disk_rule(Vec2 center, double radius, int n_theta = 512, int n_radial = 48) {
  return PolarRule{center, 0.0, radius, n_theta, n_radial};
}

template <class Fn>
inline double disk_average(Vec2 center, double radius, Fn&& fn, int n_theta = 512,
                           int n_radial = 48) {
  PolarRule rule = disk_rule(center, radius, n_theta, n_radial);
  return rule.integrate(fn) / (M_PI * radius * radius);
}

}  // namespace jacdet
