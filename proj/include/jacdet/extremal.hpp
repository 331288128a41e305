#pragma once

// The extremal quasiregular construction: the planar map
//     H(xi) = (xi/|xi| + eps |xi|^3/xi^3) |xi|^{1/d},
// its inverse f (the complex derivative of an entire p-harmonic potential),
// the beta-deformation with inverse G, sharp distortion constants, and the
// scale-invariant annulus energies of |D log|f||^2.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacdet/core.hpp"
#include "jacdet/quadrature.hpp"

namespace jacdet {

using cx = std::complex<double>;

struct ExtremalParams {
  double p = 2.0;
  double d = 1.0;
  double inv_d = 1.0;
  double eps_map = 0.0;

  explicit ExtremalParams(double p_in) : p(p_in) {
    if (!(p > 1.0)) throw config_error("ExtremalParams: p must exceed 1");
    inv_d = 0.5 * (-p + std::sqrt(16.0 * (p - 1.0) + (p - 2.0) * (p - 2.0)));
    d = 1.0 / inv_d;
    eps_map = (1.0 - d) / (1.0 + 3.0 * d);
  }
};

inline double distortion_K(double p, double beta) {
  return std::max(std::max((p - 1.0) / (beta + 1.0), (beta + 1.0) / (p - 1.0)),
                  std::max(beta + 1.0, 1.0 / (beta + 1.0)));
}

// ---------------------------------------------------------------------------
// H and its Wirtinger derivatives
// ---------------------------------------------------------------------------

inline cx map_H(const ExtremalParams& par, cx xi) {
  if (xi == cx(0.0, 0.0)) return {0.0, 0.0};  // continuous extension, 1/d > 0
  const double r = std::abs(xi);
  const cx u = xi / r;
  const cx cu = std::conj(u);
  return (u + par.eps_map * cu * cu * cu) * std::pow(r, par.inv_d);
}

struct WirtingerPair {
  cx d;     // holomorphic derivative
  cx dbar;  // antiholomorphic derivative
};

inline WirtingerPair derivatives_H(const ExtremalParams& par, cx xi) {
  if (xi == cx(0.0, 0.0)) throw geometry_error("derivatives_H: xi = 0");
  const double r = std::abs(xi);
  const cx u = xi / r;
  const cx cu4 = std::pow(std::conj(u), 4);
  const cx hxi = 0.5 * std::pow(r, par.inv_d - 1.0) *
                 ((par.inv_d + 1.0) + (par.inv_d - 3.0) * par.eps_map * cu4);
  // H_xibar from the Beltrami-type relation tied to p.
  const cx hbar = (0.5 - 1.0 / par.p) * (u * u * hxi + std::conj(u * u) * std::conj(hxi));
  return {hxi, hbar};
}

// ---------------------------------------------------------------------------
// Inverse map f = H^{-1}
//
// In polar form H(r e^{i t}) = r^{1/d} h(t) with h(t) = e^{it} + eps e^{-3it},
// and arg h is strictly increasing (eps stays below 1/3 for every p), so the
// angle solves a monotone scalar equation; the radius then follows from
// homogeneity and a short complex Newton polish removes the remaining error.
// ---------------------------------------------------------------------------

inline cx inverse_f(const ExtremalParams& par, cx z) {
  if (z == cx(0.0, 0.0)) return {0.0, 0.0};
  const double rho = std::abs(z);
  const double phi = std::arg(z);
  const double e = par.eps_map;

  auto h = [&](double t) { return cx(std::cos(t), std::sin(t)) +
                                  e * cx(std::cos(3.0 * t), -std::sin(3.0 * t)); };
  auto wrap = [](double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
  };
  auto gfun = [&](double t) { return wrap(std::arg(h(t)) - phi); };

  double lo = phi - 0.5 * M_PI, hi = phi + 0.5 * M_PI;
  double glo = gfun(lo);
  double ghi = gfun(hi);
  if (!(glo <= 0.0 && ghi >= 0.0)) {
    // Fall back to a coarse scan for the bracketing interval.
    const int n = 512;
    lo = phi - M_PI;
    glo = gfun(lo);
    for (int k = 1; k <= n; ++k) {
      double t = phi - M_PI + 2.0 * M_PI * k / n;
      double gt = gfun(t);
      if (glo <= 0.0 && gt >= 0.0) {
        hi = t;
        ghi = gt;
        break;
      }
      lo = t;
      glo = gt;
    }
  }
  for (int it = 0; it < 90; ++it) {
    double mid = 0.5 * (lo + hi);
    if (gfun(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const double r = std::pow(rho / std::abs(h(theta)), par.d);
  cx xi = r * cx(std::cos(theta), std::sin(theta));

  // Newton polish on the full complex residual.
  const double target = 1e-13 * (1.0 + rho);
  for (int it = 0; it < 50; ++it) {
    const cx res = z - map_H(par, xi);
    if (std::abs(res) <= target) return xi;
    const WirtingerPair dh = derivatives_H(par, xi);
    const double jac = std::norm(dh.d) - std::norm(dh.dbar);
    if (!(jac > 0.0)) break;
    xi += (std::conj(dh.d) * res - dh.dbar * std::conj(res)) / jac;
  }
  if (std::abs(z - map_H(par, xi)) <= 1e-12 * (1.0 + rho)) return xi;
  throw convergence_error("inverse_f: Newton failed at z = (" + std::to_string(z.real()) + "," +
                              std::to_string(z.imag()) + ")",
                          std::abs(z - map_H(par, xi)));
}

/// Wirtinger derivatives of f at z, via the inverse-function relations
/// f_z = conj(H_xi)/J and f_zbar = -H_xibar/J evaluated at xi = f(z).
inline WirtingerPair derivatives_f(const ExtremalParams& par, cx z, cx xi) {
  const WirtingerPair dh = derivatives_H(par, xi);
  const double jac = std::norm(dh.d) - std::norm(dh.dbar);
  if (!(jac > 0.0)) throw precision_error("derivatives_f: degenerate Jacobian");
  (void)z;
  return {std::conj(dh.d) / jac, -dh.dbar / jac};
}

// ---------------------------------------------------------------------------
// G = inverse of the beta-deformation g = |f|^beta f:
//   G(xi) = (xi/|xi| + eps |xi|^3/xi^3) |xi|^{1/((beta+1)d)}
// with the derivative recurrence fixing G_xibar from G_xi.
// ---------------------------------------------------------------------------

inline WirtingerPair derivatives_G(const ExtremalParams& par, double beta, cx xi) {
  if (xi == cx(0.0, 0.0)) throw geometry_error("derivatives_G: xi = 0");
  if (!(beta > -1.0)) throw config_error("derivatives_G: beta must exceed -1");
  const double a = par.inv_d / (beta + 1.0);
  const double r = std::abs(xi);
  const cx u = xi / r;
  const cx cu4 = std::pow(std::conj(u), 4);
  const cx gxi =
      0.5 * std::pow(r, a - 1.0) * ((a + 1.0) + (a - 3.0) * par.eps_map * cu4);
  const double A = (par.p - 2.0 - beta) / (par.p + beta);
  const double B = beta / (beta + 2.0);
  const cx gbar = 0.5 * (A + B) * std::conj(u * u) * gxi +
                  0.5 * (A - B) * (u * u) * std::conj(gxi);
  return {gxi, gbar};
}

// ---------------------------------------------------------------------------
// Distortion report
// ---------------------------------------------------------------------------

struct DistortionReport {
  double p = 0.0;
  double beta = 0.0;
  double K_theory = 0.0;
  double target_ratio = 0.0;  // (K-1)/(K+1)
  double ratio_sup = 0.0;
  cx location{0.0, 0.0};
  double ratio_real_axis = 0.0;
  double ratio_diagonal = 0.0;
  bool sup_on_predicted_ray = false;
  double quasireg_target = 0.0;   // K + 1/K
  double quasireg_sup = 0.0;      // sup |DV|^2 / det DV
  double quasireg_worst_slack = 0.0;

  nlohmann::json to_json() const {
    return {{"p", p},
            {"beta", beta},
            {"K_theory", K_theory},
            {"target_ratio", target_ratio},
            {"ratio_sup", ratio_sup},
            {"location", {location.real(), location.imag()}},
            {"ratio_real_axis", ratio_real_axis},
            {"ratio_diagonal", ratio_diagonal},
            {"sup_on_predicted_ray", sup_on_predicted_ray},
            {"quasireg_target", quasireg_target},
            {"quasireg_sup", quasireg_sup},
            {"quasireg_worst_slack", quasireg_worst_slack}};
  }
};

/// Sampled distortion of the beta-deformation over a polar grid of the
/// annulus 1/2 <= |xi| <= 2 plus the two rays where the bound is attained.
inline DistortionReport distortion_sup(const ExtremalParams& par, double beta,
                                       int n_theta = 512, int n_radial = 64) {
  DistortionReport rep;
  rep.p = par.p;
  rep.beta = beta;
  rep.K_theory = distortion_K(par.p, beta);
  rep.target_ratio = (rep.K_theory - 1.0) / (rep.K_theory + 1.0);
  rep.quasireg_target = rep.K_theory + 1.0 / rep.K_theory;

  double worst_slack = std::numeric_limits<double>::infinity();
  double qr_sup = 0.0;
  auto probe = [&](cx xi) {
    const WirtingerPair dg = derivatives_G(par, beta, xi);
    const double num = std::abs(dg.dbar), den = std::abs(dg.d);
    const double ratio = den > 0.0 ? num / den : 0.0;
    if (ratio > rep.ratio_sup) {
      rep.ratio_sup = ratio;
      rep.location = xi;
    }
    const double det = std::norm(dg.d) - std::norm(dg.dbar);
    const double dv2 = 2.0 * (std::norm(dg.d) + std::norm(dg.dbar));
    if (det > 0.0) {
      qr_sup = std::max(qr_sup, dv2 / det);
      worst_slack = std::min(worst_slack, rep.quasireg_target - dv2 / det);
    }
    return ratio;
  };

  std::vector<double> radii(static_cast<size_t>(n_radial));
  for (int ir = 0; ir < n_radial; ++ir)
    radii[static_cast<size_t>(ir)] =
        0.5 * std::pow(4.0, static_cast<double>(ir) / std::max(1, n_radial - 1));
  for (int it = 0; it < n_theta; ++it) {
    const double t = 2.0 * M_PI * it / n_theta;
    for (double r : radii) probe(r * cx(std::cos(t), std::sin(t)));
  }
  for (double r : radii) {
    rep.ratio_real_axis = std::max(rep.ratio_real_axis, probe(cx(r, 0.0)));
    rep.ratio_diagonal =
        std::max(rep.ratio_diagonal, probe(r * cx(std::cos(-M_PI / 4.0), std::sin(-M_PI / 4.0))));
  }

  const double A = std::abs((par.p - 2.0 - beta) / (par.p + beta));
  const double B = std::abs(beta / (beta + 2.0));
  const double on_ray = (A >= B) ? rep.ratio_real_axis : rep.ratio_diagonal;
  rep.sup_on_predicted_ray = rep.ratio_sup <= on_ray + 1e-12;
  rep.quasireg_sup = qr_sup;
  rep.quasireg_worst_slack = worst_slack;
  return rep;
}

/// Sharpness pair: sampled sup of |DV|^2 / det DV against K + 1/K.
inline std::pair<double, double> sharpness_constants(const ExtremalParams& par, double beta,
                                                     int n_theta = 2048) {
  const double K = distortion_K(par.p, beta);
  double sup = 0.0;
  for (int it = 0; it <= n_theta; ++it) {
    const double t = 2.0 * M_PI * it / n_theta;
    const cx xi = cx(std::cos(t), std::sin(t));
    const WirtingerPair dg = derivatives_G(par, beta, xi);
    const double det = std::norm(dg.d) - std::norm(dg.dbar);
    if (det <= 0.0) continue;
    sup = std::max(sup, 2.0 * (std::norm(dg.d) + std::norm(dg.dbar)) / det);
  }
  return {sup, K + 1.0 / K};
}

// ---------------------------------------------------------------------------
// Dyadic annulus energies of |D log|f||^2. The full energy splits into the
// radial part 2 pi log(2) d^2 (present for every p, exactly computable from
// homogeneity) and the angular excess, which vanishes iff the map is the
// conformal identity case p = 2.
// ---------------------------------------------------------------------------

struct AnnulusEnergy {
  int k = 0;
  double r_in = 0.0;
  double r_out = 0.0;
  double energy = 0.0;          // int of |D log|f||^2 over the annulus
  double radial_part = 0.0;     // 2 pi log 2 * d^2
  double angular_energy = 0.0;  // energy - radial_part

  nlohmann::json to_json() const {
    return {{"k", k},           {"r_in", r_in},
            {"r_out", r_out},   {"energy", energy},
            {"radial_part", radial_part}, {"angular_energy", angular_energy}};
  }
};

inline std::vector<AnnulusEnergy> annulus_log_energy(const ExtremalParams& par, int k_min,
                                                     int k_max, int n_theta = 512,
                                                     int n_radial = 24) {
  if (k_min > k_max) throw config_error("annulus_log_energy: empty k range");

  auto integrand = [&](const Vec2& xv) {
    const cx z(xv.x, xv.y);
    const cx fval = inverse_f(par, z);
    const WirtingerPair df = derivatives_f(par, z, fval);
    const cx fx = df.d + df.dbar;
    const cx fy = cx(0.0, 1.0) * (df.d - df.dbar);
    const double m2 = std::norm(fval);
    const double gx = (std::conj(fval) * fx).real() / m2;
    const double gy = (std::conj(fval) * fy).real() / m2;
    return gx * gx + gy * gy;
  };

  std::vector<AnnulusEnergy> out;
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k) ks.push_back(k);
  out.resize(ks.size());
  parallel_for(ks.size(), [&](std::size_t idx) {
    const int k = ks[idx];
    AnnulusEnergy e;
    e.k = k;
    e.r_out = std::pow(2.0, -k);
    e.r_in = 0.5 * e.r_out;
    PolarRule rule{Vec2{0.0, 0.0}, e.r_in, e.r_out, n_theta, n_radial};
    const double coarse = rule.integrate(integrand);
    PolarRule fine{Vec2{0.0, 0.0}, e.r_in, e.r_out, 2 * n_theta, n_radial + 8};
    e.energy = fine.integrate(integrand);
    if (std::abs(e.energy - coarse) > 1e-6 * (1.0 + std::abs(e.energy)))
      throw precision_error("annulus_log_energy: quadrature failed to settle");
    e.radial_part = 2.0 * M_PI * std::log(2.0) * par.d * par.d;
    e.angular_energy = e.energy - e.radial_part;
    out[idx] = e;
  });
  return out;
}

}  // namespace jacdet
