#pragma once

// Dirichlet solver for div((|Dw|^2 + eps)^{beta/2} Dw) = g on a uniform grid.
//
// Discretization: per-cell vertex quadrature of the convex energy
//     E(w) = sum_cells (hx hy / 4) sum_{4 corners} F(|D_c w|^2) + sum g w
// with F(q) = (q + eps)^{(beta+2)/2} / (beta+2) and D_c w the one-sided edge
// gradient at the corner. At beta = 0 the Euler-Lagrange system collapses to
// the classical 5-point Laplacian; the nonlinear system keeps its
// positive-coefficient neighbor structure, so the discrete maximum principle
// carries over for zero right-hand side.
//
// Minimization: damped Newton with Armijo backtracking; the Hessian of the
// convex energy is assembled sparse and factored with SimplicialLDLT.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "jacdet/analytic.hpp"
#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"

namespace jacdet {

struct SolveConfig {
  double beta = 0.0;          // exponent; p = beta + 2
  double epsilon = 0.0;       // gradient regularizer
  double tol = 1e-10;         // max-norm of the discrete Euler-Lagrange residual
  int max_newton = 200;
  std::vector<double> eps_schedule;  // optional descending continuation

  void validate() const {
    if (!(beta > -1.0)) throw config_error("SolveConfig: beta must exceed -1");
    if (epsilon < 0.0) throw config_error("SolveConfig: epsilon must be >= 0");
    if (beta < 0.0 && epsilon == 0.0)
      throw config_error("SolveConfig: beta < 0 requires epsilon > 0");
    if (!(tol > 0.0) || max_newton < 1) throw config_error("SolveConfig: bad tolerance/budget");
  }
};

struct SolveResult {
  ScalarField field;
  double residual = 0.0;          // max-norm EL residual, PDE units
  int newton_iters = 0;
  bool flat_stopped = false;      // stopped on the flat-energy guard
  std::vector<double> energy_history;
};

using BoundaryTrace = std::function<double(double, double)>;

namespace psolve_detail {

struct Assembly {
  double energy = 0.0;
  std::vector<double> grad;  // one entry per interior unknown
  std::vector<Eigen::Triplet<double>> hess;
};

class EnergyModel {
 public:
  EnergyModel(const GridSpec& g, double beta, double eps, const std::vector<double>& rhs)
      : g_(g), beta_(beta), eps_(eps), rhs_(rhs) {
    nun_ = static_cast<std::size_t>(g_.nx - 1) * static_cast<std::size_t>(g_.ny - 1);
  }

  std::size_t unknowns() const { return nun_; }

  int dof(int i, int j) const {
    if (i <= 0 || j <= 0 || i >= g_.nx || j >= g_.ny) return -1;
    return (j - 1) * (g_.nx - 1) + (i - 1);
  }

  double F(double q) const {
    return std::pow(q + eps_, 0.5 * (beta_ + 2.0)) / (beta_ + 2.0);
  }
  double Fp(double q) const { return 0.5 * std::pow(q + eps_, 0.5 * beta_); }
  double Fpp(double q) const { return 0.25 * beta_ * std::pow(q + eps_, 0.5 * beta_ - 1.0); }

  Assembly assemble(const std::vector<double>& w, bool want_hess) const {
    Assembly out;
    out.grad.assign(nun_, 0.0);
    if (want_hess) out.hess.reserve(nun_ * 12);
    const double W = 0.25 * g_.hx * g_.hy;
    const double ihx = 1.0 / g_.hx, ihy = 1.0 / g_.hy;

    for (int cj = 0; cj < g_.ny; ++cj) {
      for (int ci = 0; ci < g_.nx; ++ci) {
        const std::size_t n00 = g_.index(ci, cj), n10 = g_.index(ci + 1, cj);
        const std::size_t n01 = g_.index(ci, cj + 1), n11 = g_.index(ci + 1, cj + 1);
        const double dxb = (w[n10] - w[n00]) * ihx;  // bottom x-edge
        const double dxt = (w[n11] - w[n01]) * ihx;  // top x-edge
        const double dyl = (w[n01] - w[n00]) * ihy;  // left y-edge
        const double dyr = (w[n11] - w[n10]) * ihy;  // right y-edge

        // Corner terms pair every x-edge with every y-edge of the cell.
        corner(out, want_hess, W, dxb, ci, cj, ci + 1, cj, ihx, dyl, ci, cj, ci, cj + 1, ihy);
        corner(out, want_hess, W, dxb, ci, cj, ci + 1, cj, ihx, dyr, ci + 1, cj, ci + 1, cj + 1, ihy);
        corner(out, want_hess, W, dxt, ci, cj + 1, ci + 1, cj + 1, ihx, dyl, ci, cj, ci, cj + 1, ihy);
        corner(out, want_hess, W, dxt, ci, cj + 1, ci + 1, cj + 1, ihx, dyr, ci + 1, cj, ci + 1, cj + 1, ihy);
      }
    }

    if (!rhs_.empty()) {
      for (int j = 0; j <= g_.ny; ++j)
        for (int i = 0; i <= g_.nx; ++i) {
          const std::size_t n = g_.index(i, j);
          const double tw = ((i == 0 || i == g_.nx) ? 0.5 : 1.0) *
                            ((j == 0 || j == g_.ny) ? 0.5 : 1.0) * g_.hx * g_.hy;
          out.energy += tw * rhs_[n] * w[n];
          int d = dof(i, j);
          if (d >= 0) out.grad[static_cast<std::size_t>(d)] += tw * rhs_[n];
        }
    }
    return out;
  }

 private:
  // One corner-quadrature term F(dx^2 + dy^2); dx involves nodes (ax0) -> (ax1)
  // with sign -/+ and scale ihx, dy likewise.
  void corner(Assembly& out, bool want_hess, double W, double dx, int ax0, int ay0, int ax1,
              int ay1, double ihx, double dy, int bx0, int by0, int bx1, int by1,
              double ihy) const {
    const double q = dx * dx + dy * dy;
    out.energy += W * F(q);
    const double fp = Fp(q);

    const int dofs[4] = {dof(ax0, ay0), dof(ax1, ay1), dof(bx0, by0), dof(bx1, by1)};
    const double ddx[4] = {-ihx, ihx, 0.0, 0.0};
    const double ddy[4] = {0.0, 0.0, -ihy, ihy};

    for (int a = 0; a < 4; ++a) {
      if (dofs[a] < 0) continue;
      out.grad[static_cast<std::size_t>(dofs[a])] +=
          W * 2.0 * fp * (dx * ddx[a] + dy * ddy[a]);
    }
    if (!want_hess) return;
    // F'' blows up as q -> 0 for 0 < beta < 2; the curvature term carries a
    // dx/dy factor that vanishes there, so dropping it keeps the Hessian PSD.
    const double fpp = (beta_ != 0.0 && q + eps_ > 0.0) ? Fpp(q) : 0.0;
    for (int a = 0; a < 4; ++a) {
      if (dofs[a] < 0) continue;
      const double da = dx * ddx[a] + dy * ddy[a];
      for (int b = 0; b < 4; ++b) {
        if (dofs[b] < 0) continue;
        const double db = dx * ddx[b] + dy * ddy[b];
        double hab = 2.0 * fp * (ddx[a] * ddx[b] + ddy[a] * ddy[b]) + 4.0 * fpp * da * db;
        if (hab != 0.0) out.hess.emplace_back(dofs[a], dofs[b], W * hab);
      }
    }
  }

  GridSpec g_;
  double beta_, eps_;
  const std::vector<double>& rhs_;
  std::size_t nun_ = 0;
};

}  // namespace psolve_detail

/// Minimize the discrete regularized p-energy subject to the boundary trace.
/// `warm_start` (full node vector) seeds Newton when provided; otherwise the
/// interior starts from the discrete harmonic extension of the trace.
inline SolveResult solve_regularized(const GridSpec& grid, const SolveConfig& cfg,
                                     const BoundaryTrace& boundary,
                                     const ScalarField* rhs = nullptr,
                                     const ScalarField* warm_start = nullptr) {
  cfg.validate();
  grid.validate();
  if (rhs && !rhs->grid().same_as(grid))
    throw config_error("solve_regularized: rhs grid mismatch");
  if (warm_start && !warm_start->grid().same_as(grid))
    throw config_error("solve_regularized: warm start grid mismatch");

  std::vector<double> w(grid.node_count(), 0.0);
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i)
      if (grid.boundary(i, j)) {
        double v = boundary(grid.x(i), grid.y(j));
        if (!finite(v)) throw config_error("solve_regularized: non-finite boundary value");
        w[grid.index(i, j)] = v;
      }

  if (warm_start) {
    for (int j = 1; j < grid.ny; ++j)
      for (int i = 1; i < grid.nx; ++i)
        w[grid.index(i, j)] = (*warm_start)(i, j);
  } else {
    // Transfinite seed; the first Newton step of the beta = 0 stage (or of the
    // target problem itself) replaces it by the discrete harmonic extension.
    for (int j = 1; j < grid.ny; ++j)
      for (int i = 1; i < grid.nx; ++i) {
        double sx = static_cast<double>(i) / grid.nx;
        double sy = static_cast<double>(j) / grid.ny;
        double edge = (1 - sx) * w[grid.index(0, j)] + sx * w[grid.index(grid.nx, j)] +
                      (1 - sy) * w[grid.index(i, 0)] + sy * w[grid.index(i, grid.ny)];
        double corner = (1 - sx) * (1 - sy) * w[grid.index(0, 0)] +
                        sx * (1 - sy) * w[grid.index(grid.nx, 0)] +
                        (1 - sx) * sy * w[grid.index(0, grid.ny)] +
                        sx * sy * w[grid.index(grid.nx, grid.ny)];
        w[grid.index(i, j)] = edge - corner;
      }
  }

  static const std::vector<double> kNoRhs;
  const std::vector<double>& rv = rhs ? rhs->values() : kNoRhs;
  psolve_detail::EnergyModel model(grid, cfg.beta, cfg.epsilon, rv);
  const std::size_t n = model.unknowns();
  const double cell_area = grid.hx * grid.hy;

  SolveResult result;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  int flat_count = 0;
  double energy_prev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= cfg.max_newton; ++iter) {
    psolve_detail::Assembly a = model.assemble(w, true);
    result.energy_history.push_back(a.energy);

    double res = 0.0;
    for (double gv : a.grad) res = std::max(res, std::abs(gv));
    res /= cell_area;
    result.residual = res;
    if (res <= cfg.tol) break;

    if (iter > 0) {
      double drop = (energy_prev - a.energy) / (1.0 + std::abs(energy_prev));
      flat_count = (drop < 1e-14) ? flat_count + 1 : 0;
      if (flat_count >= 3) {
        result.flat_stopped = true;
        break;
      }
    }
    energy_prev = a.energy;
    if (iter == cfg.max_newton)
      throw convergence_error("solve_regularized: Newton budget exhausted", res);

    Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    H.setFromTriplets(a.hess.begin(), a.hess.end());
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) g[static_cast<Eigen::Index>(k)] = a.grad[k];

    Eigen::VectorXd step;
    double shift = 0.0;
    for (;;) {
      ldlt.compute(H);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && step.allFinite()) break;
      }
      shift = (shift == 0.0) ? 1e-12 : shift * 100.0;
      if (shift > 1e-2)
        throw convergence_error("solve_regularized: Hessian factorization failed", res);
      Eigen::SparseMatrix<double> I(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      I.setIdentity();
      H = H + shift * I;
    }

    const double slope = g.dot(step);  // negative for a descent direction
    double t = 1.0;
    std::vector<double> trial = w;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int j = 1; j < grid.ny; ++j)
        for (int i = 1; i < grid.nx; ++i) {
          int d = model.dof(i, j);
          trial[grid.index(i, j)] =
              w[grid.index(i, j)] + t * step[static_cast<Eigen::Index>(d)];
        }
      psolve_detail::Assembly probe = model.assemble(trial, false);
      if (probe.energy <= a.energy + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw convergence_error("solve_regularized: line search stagnated", res);
    w.swap(trial);
    result.newton_iters = iter + 1;
  }

  result.field = ScalarField(grid, std::move(w));
  return result;
}

/// p-harmonic solve (rhs = 0) with the fixed descending eps continuation.
inline SolveResult solve_pharmonic(const GridSpec& grid, double p, const BoundaryTrace& boundary,
                                   const ScalarField* warm_start = nullptr, double tol = 1e-10) {
  if (!(p > 1.0)) throw config_error("solve_pharmonic: p must exceed 1");
  const double beta = p - 2.0;

  std::vector<double> schedule{1e-2, 1e-4, 1e-6};
  schedule.push_back(beta >= 0.0 ? 0.0 : 1e-8);

  SolveResult last;
  const ScalarField* warm = warm_start;
  for (double eps : schedule) {
    SolveConfig cfg;
    cfg.beta = beta;
    cfg.epsilon = eps;
    cfg.tol = tol;
    last = solve_regularized(grid, cfg, boundary, nullptr, warm);
    warm = &last.field;
  }
  return last;
}

/// Ascending p-continuation toward the infinity-harmonic limit; returns one
/// solution per entry of the schedule, each warm started from the previous.
inline std::vector<SolveResult> infinity_approx(const GridSpec& grid,
                                                const BoundaryTrace& boundary,
                                                std::vector<double> p_schedule = {4, 8, 16, 32},
                                                double tol = 1e-10) {
  if (p_schedule.empty()) throw config_error("infinity_approx: empty schedule");
  for (std::size_t k = 0; k < p_schedule.size(); ++k) {
    if (!(p_schedule[k] > 2.0)) throw config_error("infinity_approx: each p must exceed 2");
    if (k > 0 && !(p_schedule[k] > p_schedule[k - 1]))
      throw config_error("infinity_approx: schedule must ascend");
  }
  std::vector<SolveResult> out;
  out.reserve(p_schedule.size());
  const ScalarField* warm = nullptr;
  for (double p : p_schedule) {
    out.push_back(solve_pharmonic(grid, p, boundary, warm, tol));
    warm = &out.back().field;
  }
  return out;
}

inline BoundaryTrace boundary_from(const AnalyticSolution& sol) {
  return [sol](double x, double y) { return sol.value({x, y}); };
}

}  // namespace jacdet
