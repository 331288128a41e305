#pragma once

// Closed-form solution families used as oracles: affine, the Aronsson
// function x1^{4/3} - x2^{4/3}, distance cones, the harmonic saddle x1*x2,
// and the radial p-harmonic power |x|^{(p-2)/(p-1)}.

#include <cmath>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"

namespace jacdet {

struct AnalyticJet {
  double value = 0.0;
  Vec2 grad{};
  Sym2 hess{};
  bool singular = false;  // second derivatives undefined at this point
};

class AnalyticSolution {
 public:
  enum class Kind { affine, aronsson, cone, saddle, radial_p };

  static AnalyticSolution affine(double b, Vec2 a) {
    AnalyticSolution s;
    s.kind_ = Kind::affine;
    s.b_ = b;
    s.a_ = a;
    return s;
  }
  static AnalyticSolution aronsson() {
    AnalyticSolution s;
    s.kind_ = Kind::aronsson;
    return s;
  }
  static AnalyticSolution cone(Vec2 vertex) {
    AnalyticSolution s;
    s.kind_ = Kind::cone;
    s.vertex_ = vertex;
    return s;
  }
  static AnalyticSolution saddle() {
    AnalyticSolution s;
    s.kind_ = Kind::saddle;
    return s;
  }
  // Radial power solves the p-Laplace equation away from the origin for any
  // p in (1,inf), p != 2; the exponent degenerates to 0 at p = 2.
  static AnalyticSolution radial_p(double p) {
    if (!(p > 1.0) || p == 2.0) throw config_error("radial_p: need p in (1,inf), p != 2");
    AnalyticSolution s;
    s.kind_ = Kind::radial_p;
    s.p_ = p;
    return s;
  }

  Kind kind() const { return kind_; }
  double p() const { return p_; }

  std::string name() const {
    switch (kind_) {
      case Kind::affine: return "affine";
      case Kind::aronsson: return "aronsson";
      case Kind::cone: return "cone";
      case Kind::saddle: return "saddle";
      case Kind::radial_p: return "radial_p";
    }
    return "?";
  }

  bool on_singular_set(const Vec2& x) const {
    switch (kind_) {
      case Kind::affine:
      case Kind::saddle:
        return false;
      case Kind::aronsson:
        return x.x == 0.0 || x.y == 0.0;
      case Kind::cone:
        return (x - vertex_).norm2() == 0.0;
      case Kind::radial_p:
        return x.norm2() == 0.0;
    }
    return false;
  }

  double value(const Vec2& x) const {
    switch (kind_) {
      case Kind::affine:
        return b_ + a_.dot(x);
      case Kind::aronsson: {
        double cx = std::cbrt(x.x), cy = std::cbrt(x.y);
        return x.x * cx - x.y * cy;
      }
      case Kind::cone:
        return (x - vertex_).norm();
      case Kind::saddle:
        return x.x * x.y;
      case Kind::radial_p: {
        double kappa = (p_ - 2.0) / (p_ - 1.0);
        return std::pow(x.norm2(), 0.5 * kappa);
      }
    }
    return 0.0;
  }

  Vec2 grad(const Vec2& x) const { return jet(x).grad; }

  AnalyticJet jet(const Vec2& x) const {
    AnalyticJet out;
    out.value = value(x);
    switch (kind_) {
      case Kind::affine:
        out.grad = a_;
        return out;
      case Kind::saddle:
        out.grad = {x.y, x.x};
        out.hess = {0.0, 1.0, 0.0};
        return out;
      case Kind::aronsson: {
        if (on_singular_set(x)) {
          // Du extends continuously across the axes; D2u does not.
          out.grad = {(4.0 / 3.0) * std::cbrt(x.x), -(4.0 / 3.0) * std::cbrt(x.y)};
          out.singular = true;
          return out;
        }
        double cx = std::cbrt(x.x), cy = std::cbrt(x.y);
        out.grad = {(4.0 / 3.0) * cx, -(4.0 / 3.0) * cy};
        out.hess = {(4.0 / 9.0) / (cx * cx), 0.0, -(4.0 / 9.0) / (cy * cy)};
        return out;
      }
      case Kind::cone: {
        Vec2 d = x - vertex_;
        double t = d.norm();
        if (t == 0.0) {
          out.singular = true;
          return out;
        }
        Vec2 e{d.x / t, d.y / t};
        out.grad = e;
        out.hess = {(1.0 - e.x * e.x) / t, (-e.x * e.y) / t, (1.0 - e.y * e.y) / t};
        return out;
      }
      case Kind::radial_p: {
        double t2 = x.norm2();
        if (t2 == 0.0) {
          out.singular = true;
          return out;
        }
        double kappa = (p_ - 2.0) / (p_ - 1.0);
        double tk2 = std::pow(t2, 0.5 * kappa - 1.0);  // t^{kappa-2}
        out.grad = kappa * tk2 * x;
        double tk4 = tk2 / t2;  // t^{kappa-4}
        out.hess.xx = kappa * ((kappa - 2.0) * tk4 * x.x * x.x + tk2);
        out.hess.yy = kappa * ((kappa - 2.0) * tk4 * x.y * x.y + tk2);
        out.hess.xy = kappa * (kappa - 2.0) * tk4 * x.x * x.y;
        return out;
      }
    }
    return out;
  }

  nlohmann::json descriptor() const {
    nlohmann::json j{{"kind", name()}};
    if (kind_ == Kind::affine) j["params"] = {b_, a_.x, a_.y};
    if (kind_ == Kind::cone) j["vertex"] = {vertex_.x, vertex_.y};
    if (kind_ == Kind::radial_p) j["p"] = p_;
    return j;
  }

 private:
  Kind kind_ = Kind::affine;
  double b_ = 0.0;
  Vec2 a_{};
  Vec2 vertex_{};
  double p_ = 4.0;
};

struct AnalyticEval {
  ScalarField u;
  VectorField du;
};

/// Sample u and Du at grid nodes. Nodes on the singular set raise unless the
/// caller opts into masked evaluation (value/gradient forced to 0 there).
inline AnalyticEval analytic_eval(const AnalyticSolution& sol, const GridSpec& grid,
                                  bool masked = false) {
  std::vector<double> u(grid.node_count());
  std::vector<double> g1(grid.node_count()), g2(grid.node_count());
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      Vec2 x = grid.node(i, j);
      std::size_t k = grid.index(i, j);
      if (sol.on_singular_set(x)) {
        if (!masked)
          throw geometry_error("analytic_eval: node on singular set (pass masked=true)");
        // Aronsson's u and Du extend continuously across the axes; the point
        // singularities of cone/radial_p get zero placeholders.
        AnalyticJet jet = sol.jet(x);
        bool value_ok = sol.kind() == AnalyticSolution::Kind::aronsson ||
                        sol.kind() == AnalyticSolution::Kind::cone ||
                        (sol.kind() == AnalyticSolution::Kind::radial_p && sol.p() > 2.0);
        u[k] = value_ok ? jet.value : 0.0;
        g1[k] = jet.grad.x;
        g2[k] = jet.grad.y;
        continue;
      }
      AnalyticJet jet = sol.jet(x);
      u[k] = jet.value;
      g1[k] = jet.grad.x;
      g2[k] = jet.grad.y;
    }
  return AnalyticEval{ScalarField(grid, std::move(u)),
                      VectorField(grid, std::move(g1), std::move(g2))};
}

}  // namespace jacdet
