#pragma once

// The nonlinear complex gradient V_beta(Du) = |Du|^beta (u_x1, -u_x2), its
// pointwise Jacobian determinant, the distributional determinant evaluated by
// quadrature against test bumps, and the lower/upper bound verdicts.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacdet/bump.hpp"
#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"
#include "jacdet/poly.hpp"
#include "jacdet/quadrature.hpp"
#include "jacdet/stencil.hpp"

namespace jacdet {

constexpr double kGradientFloor = 1e-14;

// ---------------------------------------------------------------------------
// Complex gradient field with critical-set bookkeeping. Nodes with
// |Du| <= floor are flagged: the field value there is 0 for beta >= 0 and the
// node is masked from pointwise reports for beta < 0.
// ---------------------------------------------------------------------------
struct ComplexGradientField {
  double beta = 0.0;
  VectorField V;
  ScalarField speed;               // |Du|^{beta+1}
  std::vector<std::uint8_t> mask;  // 1 where |Du| <= floor
  double floor = kGradientFloor;
  double masked_area = 0.0;
};

inline ComplexGradientField complex_gradient(const VectorField& du, double beta,
                                             double floor = kGradientFloor) {
  if (!(beta > -1.0)) throw config_error("complex_gradient: beta must exceed -1");
  const GridSpec& g = du.grid();
  std::vector<double> v1(g.node_count()), v2(g.node_count()), sp(g.node_count());
  std::vector<std::uint8_t> mask(g.node_count(), 0);
  double masked_area = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const Vec2 d = du(i, j);
      const double mag = d.norm();
      if (mag <= floor) {
        mask[k] = 1;
        masked_area += trapezoid_weight(g, i, j);
        v1[k] = v2[k] = sp[k] = 0.0;  // beta+1 > 0, so the limit value is 0
        continue;
      }
      const double mb = std::pow(mag, beta);
      v1[k] = mb * d.x;
      v2[k] = -mb * d.y;
      sp[k] = mb * mag;
    }
  return ComplexGradientField{beta,
                              VectorField(g, std::move(v1), std::move(v2)),
                              ScalarField(g, std::move(sp)),
                              std::move(mask),
                              floor,
                              masked_area};
}

// ---------------------------------------------------------------------------
// Pointwise determinant of the (possibly regularized) map.
//
// Primary value per node, with q = |Du|^2:
//   0.5 (q+eps)^beta [|D^2u|^2 - (Lap u)^2]
//     + beta (q+eps)^{beta-1} [|D^2u Du|^2 - Lap u * Delta_inf u]
// When p is supplied (input certified p-harmonic) the alternative form
//   (1/(beta+1)) |D|Du|^{beta+1}|^2 + (beta+1)(p-2) |Du|^{2beta-4} (Delta_inf u)^2
// is evaluated alongside.
// ---------------------------------------------------------------------------
struct PointwiseDet {
  ScalarField det;
  std::optional<ScalarField> det_pharmonic;
  std::vector<std::uint8_t> mask;
  double masked_area = 0.0;
};

namespace detail {

inline double det39_value(const Vec2& g, const Sym2& h, double beta, double eps) {
  if (beta == 0.0) return 0.5 * (h.frob2() - h.trace() * h.trace());
  const double qe = g.norm2() + eps;
  if (qe == 0.0) return 0.0;  // beta > 0 limit; beta < 0 callers must regularize
  const Vec2 hg = h.apply(g);
  const double lap = h.trace();
  return 0.5 * std::pow(qe, beta) * (h.frob2() - lap * lap) +
         beta * std::pow(qe, beta - 1.0) * (hg.norm2() - lap * hg.dot(g));
}

}  // namespace detail

/// Stencil-based pointwise determinant of a sampled field.
inline PointwiseDet pointwise_det(const ScalarField& u, double beta,
                                  std::optional<double> p = std::nullopt, double eps = 0.0,
                                  double floor = kGradientFloor) {
  if (!(beta > -1.0)) throw config_error("pointwise_det: beta must exceed -1");
  if (eps < 0.0) throw config_error("pointwise_det: eps must be >= 0");
  const GridSpec& g = u.grid();
  const VectorField du = gradient(u);
  const HessianField h = hessian(u);

  PointwiseDet out{ScalarField::zero(g), std::nullopt,
                   std::vector<std::uint8_t>(g.node_count(), 0), 0.0};
  ScalarField det61 = ScalarField::zero(g);

  std::optional<VectorField> dspeed;
  if (p) {
    ScalarField speed = ScalarField::zero(g);
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        speed.at(i, j) = std::pow(du(i, j).norm(), beta + 1.0);
    dspeed = gradient(speed);
  }

  std::size_t flagged = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const Vec2 grad = du(i, j);
      const double mag = grad.norm();
      const Sym2 hess = h(i, j);
      const bool below_floor = mag <= floor;
      if (below_floor) {
        ++flagged;
        // beta = 0 keeps a well-defined value (-det D^2u); beta > 0 extends by
        // 0; beta < 0 must be regularized, so the node drops from the report.
        if (beta != 0.0 && eps == 0.0) {
          out.mask[k] = 1;
          out.masked_area += trapezoid_weight(g, i, j);
          if (beta > 0.0) out.det.at(i, j) = 0.0;
          continue;
        }
      }
      out.det.at(i, j) = detail::det39_value(grad, hess, beta, eps);
      if (p) {
        if (below_floor) continue;  // the p-harmonic form divides by |Du|
        const double q = mag * mag;
        const Vec2 hg = hess.apply(grad);
        const double ainf_over_q = hg.dot(grad) / q;
        det61.at(i, j) = (*dspeed)(i, j).norm2() / (beta + 1.0) +
                         (beta + 1.0) * (*p - 2.0) * std::pow(q, beta) * ainf_over_q *
                             ainf_over_q;
      }
    }
  if (flagged == g.node_count())
    throw precondition_error("pointwise_det: every node is below the gradient floor");
  if (beta < 0.0 && eps == 0.0 && flagged > 0)
    throw precondition_error("pointwise_det: beta < 0 with vanishing gradient needs eps > 0");
  if (p) out.det_pharmonic = std::move(det61);
  return out;
}

/// Exact-jet pointwise determinant of a polynomial on grid nodes.
inline PointwiseDet pointwise_det(const PolyField& v, const GridSpec& grid, double beta,
                                  std::optional<double> p = std::nullopt, double eps = 0.0,
                                  double floor = kGradientFloor) {
  if (!(beta > -1.0)) throw config_error("pointwise_det: beta must exceed -1");
  PolyField vx = v.dx(), vy = v.dy();
  PolyField vxx = vx.dx(), vxy = vx.dy(), vyy = vy.dy();

  PointwiseDet out{ScalarField::zero(grid), std::nullopt,
                   std::vector<std::uint8_t>(grid.node_count(), 0), 0.0};
  ScalarField det61 = ScalarField::zero(grid);
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      const Vec2 x = grid.node(i, j);
      const Vec2 g{vx(x), vy(x)};
      const Sym2 h{vxx(x), vxy(x), vyy(x)};
      const bool below_floor = g.norm() <= floor;
      if (below_floor && beta != 0.0 && eps == 0.0) {
        out.mask[grid.index(i, j)] = 1;
        out.masked_area += trapezoid_weight(grid, i, j);
        if (beta < 0.0) continue;
      }
      if (!out.mask[grid.index(i, j)]) out.det.at(i, j) = detail::det39_value(g, h, beta, eps);
      if (p && !below_floor) {
        const double q = g.norm2();
        const Vec2 hg = h.apply(g);
        // Exact chain rule: |D|Dv|^{beta+1}|^2 = (beta+1)^2 q^{beta-1} |D^2v Dv|^2.
        const double t = hg.dot(g) / q;
        det61.at(i, j) = (beta + 1.0) * std::pow(q, beta - 1.0) * hg.norm2() +
                         (beta + 1.0) * (*p - 2.0) * std::pow(q, beta) * t * t;
      }
    }
  if (p) out.det_pharmonic = std::move(det61);
  return out;
}

// ---------------------------------------------------------------------------
// Distributional pairing and bound bookkeeping
// ---------------------------------------------------------------------------

struct PairingReport {
  double pairing = 0.0;
  double lower_rhs = 0.0;      // (1/(beta+1)) int |D|Du|^{beta+1}|^2 psi
  double upper_rhs = 0.0;      // bracket * avg_B |Du|^{2+2beta}, filled by check_bounds
  double c_emp = 0.0;
  double beta = 0.0;
  std::optional<double> p;
  nlohmann::json psi;
  std::string mode = "weak";   // weak | pointwise
  bool orthogonal = false;     // third integral dropped (infinity-harmonic inputs)
  double orthogonality_residual = 0.0;  // value of the dropped integral
  double masked_area = 0.0;
  double integral_1 = 0.0, integral_2 = 0.0, integral_3 = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"pairing", pairing},  {"lower_rhs", lower_rhs},
                     {"upper_rhs", upper_rhs}, {"C_emp", c_emp},
                     {"beta", beta},        {"psi", psi},
                     {"mode", mode},        {"masked_area", masked_area}};
    j["p"] = p ? nlohmann::json(*p) : nlohmann::json();
    if (orthogonal) j["orthogonality_residual"] = orthogonality_residual;
    return j;
  }
};

/// Weak determinant pairing of a sampled field against a test bump.
///
/// D|Du|^{beta+1} is differenced from the speed field itself, never chained
/// through D^2u, and nodes below the gradient floor contribute their
/// continuous-limit value 0 while their area is tallied.
inline PairingReport weak_det_pairing(const ScalarField& u, double beta, const TestBump& psi,
                                      bool orthogonal_mode = false,
                                      double floor = kGradientFloor) {
  if (!(beta > -1.0)) throw config_error("weak_det_pairing: beta must exceed -1");
  const GridSpec& g = u.grid();
  if (!psi.supported_in(g))
    throw geometry_error("weak_det_pairing: bump support escapes the grid");

  const VectorField du = gradient(u);
  ScalarField speed = ScalarField::zero(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      speed.at(i, j) = std::pow(du(i, j).norm(), beta + 1.0);
  const VectorField dspeed = gradient(speed);

  double i1 = 0.0, i2 = 0.0, i3 = 0.0, lower = 0.0, masked_area = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const BumpDerivatives b = psi.eval(g.node(i, j));
      if (b.value == 0.0 && b.grad.norm2() == 0.0 && b.laplacian == 0.0) continue;
      const double w = trapezoid_weight(g, i, j);
      const Vec2 grad = du(i, j);
      const double mag = grad.norm();

      lower += w * dspeed(i, j).norm2() * b.value / (beta + 1.0);
      if (mag <= floor) {
        masked_area += w;  // all three integrands extend by 0 here
        continue;
      }
      const double q = mag * mag;
      i1 += w * (-0.5) * std::pow(q, beta) * b.hessian.apply(grad).dot(grad);
      i2 += w * std::pow(q, beta + 1.0) * b.laplacian / (2.0 * beta + 2.0);
      const Vec2 e{grad.x / mag, grad.y / mag};
      i3 += w * (-(beta / (beta + 1.0))) * (dspeed(i, j).dot(e)) * (e.dot(b.grad)) *
            std::pow(mag, beta + 1.0);
    }

  PairingReport rep;
  rep.beta = beta;
  rep.psi = psi.descriptor();
  rep.mode = "weak";
  rep.orthogonal = orthogonal_mode;
  rep.integral_1 = i1;
  rep.integral_2 = i2;
  rep.integral_3 = i3;
  rep.orthogonality_residual = i3;
  rep.pairing = orthogonal_mode ? i1 + i2 : i1 + i2 + i3;
  rep.lower_rhs = lower;
  rep.masked_area = masked_area;
  return rep;
}

/// Pairing of a pointwise determinant field against psi (mode "pointwise");
/// the oracle side of the pointwise-vs-distributional equivalence.
inline PairingReport pairing_from_pointwise(const PointwiseDet& pd, double beta,
                                            const TestBump& psi) {
  const GridSpec& g = pd.det.grid();
  if (!psi.supported_in(g))
    throw geometry_error("pairing_from_pointwise: bump support escapes the grid");
  PairingReport rep;
  rep.beta = beta;
  rep.psi = psi.descriptor();
  rep.mode = "pointwise";
  rep.masked_area = pd.masked_area;
  rep.pairing = integrate_nodes(g, [&](int i, int j) {
    if (pd.mask[g.index(i, j)]) return 0.0;
    return pd.det(i, j) * psi.value(g.node(i, j));
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Bound verdicts: lower bound with factor min{1, p-1}, upper bound with the
// empirical constant reported (never asserted against a numeric target).
// ---------------------------------------------------------------------------
struct BoundsVerdict {
  PairingReport lower_report;
  PairingReport upper_report;
  double lower_factor = 1.0;
  double lower_margin = 0.0;   // pairing - factor * lower_rhs
  bool lower_ok = false;
  bool nonneg_ok = false;
  double upper_avg = 0.0;      // avg_B |Du|^{2+2beta}
  double upper_bracket = 0.0;
  double c_emp = 0.0;
  bool pass = false;

  nlohmann::json to_json() const {
    return {{"lower", lower_report.to_json()},
            {"upper", upper_report.to_json()},
            {"lower_factor", lower_factor},
            {"lower_margin", lower_margin},
            {"lower_ok", lower_ok},
            {"nonneg_ok", nonneg_ok},
            {"upper_avg", upper_avg},
            {"upper_bracket", upper_bracket},
            {"C_emp", c_emp},
            {"pass", pass}};
  }
};

/// Evaluate both bounds on the ball B(center, r). The lower check reuses the
/// caller's nonnegative psi; the upper check pairs with the plateau bump that
/// equals 1 on the half ball and computes the ball average of |Du|^{2+2beta}
/// by polar quadrature with bilinear sampling.
inline BoundsVerdict check_bounds(const ScalarField& u, double beta, const TestBump& lower_psi,
                                  Vec2 center, double r, std::optional<double> p = std::nullopt,
                                  double slack = 1e-3, double floor = kGradientFloor) {
  const GridSpec& g = u.grid();
  if (!g.contains_disk(center, r))
    throw geometry_error("check_bounds: ball escapes the grid rectangle");

  BoundsVerdict v;
  v.lower_report = weak_det_pairing(u, beta, lower_psi, false, floor);
  v.lower_report.p = p;
  v.lower_factor = (p && *p < 2.0) ? (*p - 1.0) : 1.0;
  v.lower_margin = v.lower_report.pairing - v.lower_factor * v.lower_report.lower_rhs;
  v.lower_ok = v.lower_margin >= -slack;
  v.nonneg_ok = v.lower_report.pairing >= -slack;

  v.upper_report = weak_det_pairing(u, beta, TestBump::plateau(center, r), false, floor);
  v.upper_report.p = p;
  const VectorField du = gradient(u);
  ScalarField pw = ScalarField::zero(g);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      pw.at(i, j) = std::pow(du(i, j).norm2(), beta + 1.0);  // |Du|^{2+2beta}
  v.upper_avg = disk_average(center, r, [&](const Vec2& x) { return pw.interp(x.x, x.y); });
  v.upper_bracket = p ? 1.0 + 1.0 / (1.0 + beta) + beta * beta / ((*p - 1.0) * (beta + 1.0))
                      : 1.0 + 1.0 / (beta + 1.0);
  const double denom = v.upper_bracket * v.upper_avg;
  v.c_emp = denom > 0.0 ? v.upper_report.pairing / denom : 0.0;
  v.upper_report.upper_rhs = denom;
  v.upper_report.c_emp = v.c_emp;
  v.pass = v.lower_ok && v.nonneg_ok && finite(v.c_emp);
  return v;
}

// ---------------------------------------------------------------------------
// Weak-star convergence bookkeeping along a p-sweep.
// ---------------------------------------------------------------------------
struct SweepRow {
  double p = 0.0;
  double beta = 0.0;
  double pairing = 0.0;
  double gap_to_limit = 0.0;
};

struct SweepPairings {
  std::vector<SweepRow> rows;
  double pairing_limit = 0.0;
};

inline SweepPairings weak_convergence_pairings(const std::vector<ScalarField>& fields,
                                               const std::vector<double>& ps,
                                               const ScalarField& u_inf, double beta,
                                               const TestBump& psi) {
  if (fields.size() != ps.size())
    throw config_error("weak_convergence_pairings: field/p count mismatch");
  for (const auto& f : fields)
    if (!f.grid().same_as(u_inf.grid()))
      throw config_error("weak_convergence_pairings: grid mismatch");
  SweepPairings out;
  out.pairing_limit = weak_det_pairing(u_inf, beta, psi).pairing;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    double pairing = weak_det_pairing(fields[k], beta, psi).pairing;
    out.rows.push_back(
        {ps[k], beta, pairing, std::abs(pairing - out.pairing_limit)});
  }
  return out;
}

}  // namespace jacdet
