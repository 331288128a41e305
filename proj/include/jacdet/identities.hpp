#pragma once

// Machine-precision verification of the pointwise differential identities on
// exactly differentiated inputs. Each checker evaluates the two (or more)
// sides of one identity from closed-form derivatives and reports the worst
// relative residual |LHS-RHS| / (1 + |LHS| + |RHS|) over the sample set.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacdet/analytic.hpp"
#include "jacdet/bump.hpp"
#include "jacdet/core.hpp"
#include "jacdet/poly.hpp"
#include "jacdet/quadrature.hpp"

namespace jacdet {

struct IdentityResidual {
  std::string identity_id;
  double max_rel_residual = 0.0;
  int sample_count = 0;
  double beta = 0.0;
  double epsilon = 0.0;
  double p = 0.0;

  void absorb(double lhs, double rhs) {
    double rel = std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
    max_rel_residual = std::max(max_rel_residual, rel);
    ++sample_count;
  }

  nlohmann::json to_json() const {
    return {{"identity_id", identity_id}, {"max_rel_residual", max_rel_residual},
            {"sample_count", sample_count}, {"beta", beta},
            {"epsilon", epsilon},          {"p", p}};
  }
};

inline std::vector<Vec2> sample_points(int count, std::mt19937_64& rng, double lo = -1.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  std::vector<Vec2> pts(static_cast<size_t>(count));
  for (auto& p : pts) p = {uni(rng), uni(rng)};
  return pts;
}

namespace detail {

/// Pointwise quantities entering every identity, from an exact jet.
struct JetScalars {
  Vec2 g;        // Dv
  Sym2 h;        // D2v
  double q;      // |Dv|^2
  double lap;    // trace
  Vec2 hg;       // D2v Dv
  double hg2;    // |D2v Dv|^2
  double ainf;   // Delta_inf v = D2v Dv . Dv
  double frob2;  // |D2v|^2
};

inline JetScalars jet_scalars(const Vec2& g, const Sym2& h) {
  JetScalars s;
  s.g = g;
  s.h = h;
  s.q = g.norm2();
  s.lap = h.trace();
  s.hg = h.apply(g);
  s.hg2 = s.hg.norm2();
  s.ainf = s.hg.dot(g);
  s.frob2 = h.frob2();
  return s;
}

/// -det of the exact Jacobian of x -> (|Dv|^2 + eps)^{beta/2} Dv.
inline double neg_det_regularized_map(const Vec2& g, const Sym2& h, double beta, double eps) {
  if (beta == 0.0) return -h.det();
  const JetScalars s = jet_scalars(g, h);
  const double qe = s.q + eps;
  if (qe == 0.0) return 0.0;  // continuous extension, valid for beta > 0
  const double m = std::pow(qe, 0.5 * beta);
  // (half |Dv|^2)_x = (D2v Dv)_1, same in y.
  const double w11 = m * (h.xx + beta * s.hg.x * g.x / qe);
  const double w12 = m * (h.xy + beta * s.hg.y * g.x / qe);
  const double w21 = m * (h.xy + beta * s.hg.x * g.y / qe);
  const double w22 = m * (h.yy + beta * s.hg.y * g.y / qe);
  return -(w11 * w22 - w12 * w21);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Divergence structure of -det D^2 v. Four expressions must agree:
//   A = -det D^2 v
//   B = 1/2 [|D^2 v|^2 - (Lap v)^2]
//   C = 1/2 div(D^2v Dv - Lap v Dv)          (third derivatives)
//   D = 1/2 [Lap(|Dv|^2) - (v_i v_j)_{ij}]   (exact polynomial products)
// ---------------------------------------------------------------------------
inline IdentityResidual check_div_structure(const PolyField& v, const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "div_struct_2.1";

  PolyField vx = v.dx(), vy = v.dy();
  PolyField q = vx * vx + vy * vy;  // |Dv|^2
  PolyField lap_q = q.dx().dx() + q.dy().dy();
  // sum_ij d_i d_j (v_i v_j)
  PolyField mixed = (vx * vx).dx().dx() + (vx * vy).dx().dy() * 2.0 + (vy * vy).dy().dy();

  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    const auto s = detail::jet_scalars(J.g, J.h);
    const double A = -(J.h.xx * J.h.yy - J.h.xy * J.h.xy);
    const double B = 0.5 * (s.frob2 - s.lap * s.lap);
    // F = D2v Dv - Lap v Dv; div F expanded through third derivatives.
    const double dF1dx = J.vxxy * J.g.y + J.h.xy * J.h.xy - J.vxyy * J.g.x - J.h.yy * J.h.xx;
    const double dF2dy = J.vxyy * J.g.x + J.h.xy * J.h.xy - J.vxxy * J.g.y - J.h.xx * J.h.yy;
    const double C = 0.5 * (dF1dx + dF2dy);
    const double D = 0.5 * (lap_q(x) - mixed(x));
    res.absorb(A, B);
    res.absorb(A, C);
    res.absorb(A, D);
  }
  return res;
}

// ---------------------------------------------------------------------------
// |D^2v Dv|^2 - Lap v * Delta_inf v = 1/2 [|D^2v|^2 - (Lap v)^2] |Dv|^2
// ---------------------------------------------------------------------------
inline IdentityResidual check_hessian_identity(const PolyField& v,
                                               const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "hess_id_3.8";
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    const auto s = detail::jet_scalars(J.g, J.h);
    const double lhs = s.hg2 - s.lap * s.ainf;
    const double rhs = 0.5 * (s.frob2 - s.lap * s.lap) * s.q;
    res.absorb(lhs, rhs);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Structural identity for the regularized map:
//   -det D[(|Dv|^2+eps)^{beta/2} Dv]
//     = 1/2 (q+eps)^beta [|D^2v|^2 - (Lap v)^2]
//       + beta (q+eps)^{beta-1} [|D^2v Dv|^2 - Lap v * Delta_inf v]
// eps = 0 admitted only when the gradient does not vanish on the samples.
// ---------------------------------------------------------------------------
inline IdentityResidual check_structural_identity(const PolyField& v, double beta, double eps,
                                                  const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "struct_3.9";
  res.beta = beta;
  res.epsilon = eps;
  if (eps < 0.0) throw config_error("check_structural_identity: eps must be >= 0");
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    const auto s = detail::jet_scalars(J.g, J.h);
    if (eps == 0.0 && s.q == 0.0)
      throw precondition_error("check_structural_identity: eps = 0 with vanishing gradient");
    const double lhs = detail::neg_det_regularized_map(J.g, J.h, beta, eps);
    const double qe = s.q + eps;
    const double rhs = 0.5 * std::pow(qe, beta) * (s.frob2 - s.lap * s.lap) +
                       beta * std::pow(qe, beta - 1.0) * (s.hg2 - s.lap * s.ainf);
    res.absorb(lhs, rhs);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Weak form of the structural identity: quadrature of the pointwise left side
// against psi versus the three right-hand integrals, all integrands exact.
// The residual is pure quadrature mismatch, O(h^2).
// ---------------------------------------------------------------------------
struct WeakIdentityResult {
  double abs_gap = 0.0;
  double rel_residual = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

inline WeakIdentityResult check_weak_identity(const PolyField& v, double beta, double eps,
                                              const TestBump& psi, const GridSpec& grid) {
  if (!psi.supported_in(grid))
    throw geometry_error("check_weak_identity: bump support escapes the grid");
  if (eps < 0.0 || (eps == 0.0 && beta < 0.0))
    throw precondition_error("check_weak_identity: need eps > 0 when beta < 0");

  PolyField vx = v.dx(), vy = v.dy();
  PolyField vxx = vx.dx(), vxy = vx.dy(), vyy = vy.dy();

  double lhs = 0.0, i1 = 0.0, i2 = 0.0, i3 = 0.0;
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      const Vec2 x = grid.node(i, j);
      const BumpDerivatives b = psi.eval(x);
      if (b.value == 0.0 && b.grad.norm2() == 0.0 && b.laplacian == 0.0) continue;
      const double w = trapezoid_weight(grid, i, j);
      const Vec2 g{vx(x), vy(x)};
      const Sym2 h{vxx(x), vxy(x), vyy(x)};
      const auto s = detail::jet_scalars(g, h);
      const double qe = s.q + eps;

      lhs += w * detail::neg_det_regularized_map(g, h, beta, eps) * b.value;

      const double pow_b = qe > 0.0 ? std::pow(qe, beta) : 0.0;
      const double pow_b1 = std::pow(qe, beta + 1.0);
      i1 += w * (-0.5) * pow_b * (b.hessian.apply(g).dot(g));
      i2 += w * (1.0 / (2.0 * beta + 2.0)) * pow_b1 * b.laplacian;
      // Third integral collapsed through the exact chain rule:
      //   -beta (q+eps)^{beta-1} Delta_inf v (Dv . Dpsi)
      const double pow_bm1 = qe > 0.0 ? std::pow(qe, beta - 1.0) : 0.0;
      i3 += w * (-beta) * pow_bm1 * s.ainf * (g.dot(b.grad));
    }
  const double rhs = i1 + i2 + i3;
  WeakIdentityResult out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.abs_gap = std::abs(lhs - rhs);
  out.rel_residual = out.abs_gap / (1.0 + std::abs(lhs) + std::abs(rhs));
  return out;
}

// ---------------------------------------------------------------------------
// The u^2 pairing identity for analytic infinity-harmonic inputs:
//   int (-det D^2u) u^2 psi + int |Du|^4 psi
//     = -int |Du|^2 (Du.Dpsi) u + 1/2 int u^2 [|Du|^2 Lap psi - D2psi Du.Du]
// Both sides by shared quadrature; residual O(h^2).
// ---------------------------------------------------------------------------
inline double check_u2_formula(const AnalyticSolution& u, const TestBump& psi,
                               const GridSpec& grid) {
  if (!psi.supported_in(grid))
    throw geometry_error("check_u2_formula: bump support escapes the grid");
  if (u.kind() == AnalyticSolution::Kind::aronsson) {
    // Second derivatives blow up on the axes; insist the region avoids them.
    if (grid.x0 <= 0.0 && grid.x1() >= 0.0)
      throw geometry_error("check_u2_formula: region touches the x1 = 0 axis");
    if (grid.y0 <= 0.0 && grid.y1() >= 0.0)
      throw geometry_error("check_u2_formula: region touches the x2 = 0 axis");
  }

  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      const Vec2 x = grid.node(i, j);
      const BumpDerivatives b = psi.eval(x);
      if (b.value == 0.0 && b.grad.norm2() == 0.0 && b.laplacian == 0.0) continue;
      const double w = trapezoid_weight(grid, i, j);
      const AnalyticJet jet = u.jet(x);
      const double q = jet.grad.norm2();
      const double negdet = -jet.hess.det();
      lhs += w * (negdet * jet.value * jet.value * b.value + q * q * b.value);
      rhs += w * (-q * jet.grad.dot(b.grad) * jet.value +
                  0.5 * jet.value * jet.value *
                      (q * b.laplacian - b.hessian.apply(jet.grad).dot(jet.grad)));
    }
  return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

// ---------------------------------------------------------------------------
// The p-harmonic determinant formula. Two modes share the checker:
//
//  * arbitrary smooth input (PolyField): the p-eliminated core of the same
//    identity, -det D[|Dv|^beta Dv] = (beta+1) |Dv|^{2beta-2} [|D^2vDv|^2 -
//    Lap v * Delta_inf v], which holds for every smooth v off the critical
//    set;
//  * certified p-harmonic input: the full form
//    (1/(beta+1)) |D|Dv|^{beta+1}|^2
//        + (beta+1)(p-2) |Dv|^{2beta} (Delta_inf v)^2 / |Dv|^4.
// ---------------------------------------------------------------------------

namespace detail {

inline void pharm_absorb(IdentityResidual& res, const Vec2& g, const Sym2& h, double beta,
                         bool have_p, double p) {
  const auto s = jet_scalars(g, h);
  if (s.q == 0.0) throw precondition_error("pharm_6.1: sample on the critical set");
  const double lhs = neg_det_regularized_map(g, h, beta, 0.0);
  if (have_p) {
    // |D|Dv|^{beta+1}|^2 = (beta+1)^2 |Dv|^{2beta-2} |D^2v Dv|^2 exactly.
    const double speed_grad2 =
        (beta + 1.0) * (beta + 1.0) * std::pow(s.q, beta - 1.0) * s.hg2;
    const double rhs = speed_grad2 / (beta + 1.0) +
                       (beta + 1.0) * (p - 2.0) * std::pow(s.q, beta - 2.0) * s.ainf * s.ainf;
    res.absorb(lhs, rhs);
  } else {
    const double rhs = (beta + 1.0) * std::pow(s.q, beta - 1.0) * (s.hg2 - s.lap * s.ainf);
    res.absorb(lhs, rhs);
  }
}

}  // namespace detail

inline IdentityResidual check_pharmonic_formula_core(const PolyField& v, double beta,
                                                     const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "pharm_6.1";
  res.beta = beta;
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    detail::pharm_absorb(res, J.g, J.h, beta, false, 0.0);
  }
  return res;
}

inline IdentityResidual check_pharmonic_formula(double p, const AnalyticSolution& u, double beta,
                                                const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "pharm_6.1";
  res.beta = beta;
  res.p = p;
  for (const Vec2& x : samples) {
    AnalyticJet jet = u.jet(x);
    if (jet.singular) throw precondition_error("pharm_6.1: sample on the singular set");
    detail::pharm_absorb(res, jet.grad, jet.hess, beta, true, p);
  }
  return res;
}

/// Same formula on an exactly harmonic polynomial (p = 2).
inline IdentityResidual check_pharmonic_formula_harmonic(const PolyField& v, double beta,
                                                         const std::vector<Vec2>& samples) {
  IdentityResidual res;
  res.identity_id = "pharm_6.1";
  res.beta = beta;
  res.p = 2.0;
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    detail::pharm_absorb(res, J.g, J.h, beta, true, 2.0);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Unit-gradient-field identity. For any smooth v off the critical set,
//   |D[|Dv|^{-1} Dv]|^2 = |D^2v|^2/|Dv|^2 - |D^2v Dv|^2/|Dv|^4,
// and the core form of the p-statement reads
//   ... = |D log|Dv||^2 + (Lap v)^2/|Dv|^2 - 2 Lap v * Delta_inf v /|Dv|^4.
// With the p-harmonic substitution Lap v = -(p-2) Delta_inf v / |Dv|^2 this
// becomes |D log|Dv||^2 + p(p-2) (Delta_inf v)^2 / |Dv|^6, with equality at
// p = 2 and the sandwich constants (p-1)^2 <= ratio <= 1 for 1 < p < 2.
// ---------------------------------------------------------------------------

struct LogGradientStats {
  IdentityResidual residual;
  bool upper_ok = true;    // lhs <= |D log|Dv||^2 + slack  (used for p < 2)
  bool lower_ok = true;    // lhs >= factor * |D log|Dv||^2 - slack
  double worst_margin = 0.0;
};

namespace detail {

inline void log_grad_absorb(LogGradientStats& st, const Vec2& g, const Sym2& h, bool have_p,
                            double p) {
  const auto s = jet_scalars(g, h);
  if (s.q == 0.0) throw precondition_error("log_grad_A.1: sample on the critical set");
  const double lhs = s.frob2 / s.q - s.hg2 / (s.q * s.q);
  const double dlog2 = s.hg2 / (s.q * s.q);
  double rhs;
  if (have_p) {
    rhs = dlog2 + p * (p - 2.0) * s.ainf * s.ainf / (s.q * s.q * s.q);
  } else {
    rhs = dlog2 + s.lap * s.lap / s.q - 2.0 * s.lap * s.ainf / (s.q * s.q);
  }
  st.residual.absorb(lhs, rhs);
  if (have_p) {
    const double scale = 1.0 + std::abs(lhs) + dlog2;
    if (p >= 2.0) {
      double margin = (lhs - dlog2) / scale;
      st.worst_margin = std::min(st.worst_margin, margin);
      if (margin < -1e-12) st.lower_ok = false;
    } else {
      double lo = (lhs - (p - 1.0) * (p - 1.0) * dlog2) / scale;
      double hi = (dlog2 - lhs) / scale;
      st.worst_margin = std::min({st.worst_margin, lo, hi});
      if (lo < -1e-12) st.lower_ok = false;
      if (hi < -1e-12) st.upper_ok = false;
    }
  }
}

}  // namespace detail

inline LogGradientStats check_log_gradient_identity_core(const PolyField& v,
                                                         const std::vector<Vec2>& samples) {
  LogGradientStats st;
  st.residual.identity_id = "log_grad_A.1";
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    detail::log_grad_absorb(st, J.g, J.h, false, 0.0);
  }
  return st;
}

inline LogGradientStats check_log_gradient_identity(double p, const AnalyticSolution& u,
                                                    const std::vector<Vec2>& samples) {
  LogGradientStats st;
  st.residual.identity_id = "log_grad_A.1";
  st.residual.p = p;
  for (const Vec2& x : samples) {
    AnalyticJet jet = u.jet(x);
    if (jet.singular) throw precondition_error("log_grad_A.1: sample on the singular set");
    detail::log_grad_absorb(st, jet.grad, jet.hess, true, p);
  }
  return st;
}

inline LogGradientStats check_log_gradient_identity_harmonic(const PolyField& v,
                                                             const std::vector<Vec2>& samples) {
  LogGradientStats st;
  st.residual.identity_id = "log_grad_A.1";
  st.residual.p = 2.0;
  for (const Vec2& x : samples) {
    PolyField::Jet3 J = v.jet3(x);
    detail::log_grad_absorb(st, J.g, J.h, true, 2.0);
  }
  return st;
}

}  // namespace jacdet
