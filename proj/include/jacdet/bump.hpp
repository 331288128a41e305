#pragma once

// Compactly supported radial test weights with closed-form derivatives.
//
// Two profiles share one type:
//   polynomial  psi(x) = (1 - |x-c|^2/r^2)^order on B(c,r), 0 outside
//   plateau     psi = 1 on |x-c| <= r/2, C^3 polynomial decay to 0 at r
//
// Derivatives are always evaluated from the radial profile analytically,
// never by stencils, so weak pairings carry no psi-side discretization error.

#include <cmath>

#include <nlohmann/json.hpp>

#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"

namespace jacdet {

struct BumpDerivatives {
  double value = 0.0;
  Vec2 grad{};
  Sym2 hessian{};
  double laplacian = 0.0;
};

class TestBump {
 public:
  enum class Kind { polynomial, plateau };

  TestBump(Vec2 center, double radius, int order = 4, Kind kind = Kind::polynomial)
      : center_(center), radius_(radius), order_(order), kind_(kind) {
    if (!(radius_ > 0.0)) throw config_error("TestBump: radius must be positive");
    if (kind_ == Kind::polynomial && order_ < 3)
      throw config_error("TestBump: polynomial order must be >= 3");
  }

  static TestBump plateau(Vec2 center, double radius) {
    return TestBump(center, radius, 7, Kind::plateau);
  }

  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  int order() const { return order_; }
  Kind kind() const { return kind_; }
  bool is_plateau() const { return kind_ == Kind::plateau; }

  bool supported_in(const GridSpec& grid) const {
    return grid.contains_disk(center_, radius_);
  }

  double value(const Vec2& x) const { return eval(x).value; }

  BumpDerivatives eval(const Vec2& x) const {
    BumpDerivatives out;
    const Vec2 d = x - center_;
    const double q = d.norm2();
    if (q >= radius_ * radius_) return out;  // identically zero outside

    if (kind_ == Kind::polynomial) {
      // psi = (1 - q/r^2)^k as a function of q = |x-c|^2.
      const double r2 = radius_ * radius_;
      const double s = 1.0 - q / r2;
      const double k = static_cast<double>(order_);
      const double sk = std::pow(s, order_);
      const double skm1 = std::pow(s, order_ - 1);
      const double skm2 = std::pow(s, order_ - 2);
      const double dpsi_dq = -(k / r2) * skm1;
      const double d2psi_dq2 = (k * (k - 1.0) / (r2 * r2)) * skm2;
      out.value = sk;
      out.grad = 2.0 * dpsi_dq * d;
      out.hessian.xx = 2.0 * dpsi_dq + 4.0 * d2psi_dq2 * d.x * d.x;
      out.hessian.yy = 2.0 * dpsi_dq + 4.0 * d2psi_dq2 * d.y * d.y;
      out.hessian.xy = 4.0 * d2psi_dq2 * d.x * d.y;
      out.laplacian = out.hessian.trace();
      return out;
    }

    // Plateau: radial profile phi(t), t = |x-c|; flat value 1 for t <= r/2,
    // then phi = 1 - S7(tau) on the decay band, tau = (t - r/2)/(r/2).
    // S7 = 35 t^4 - 84 t^5 + 70 t^6 - 20 t^7 has vanishing derivatives up to
    // order 3 at both ends, so psi is C^3 on the plane.
    const double t = std::sqrt(q);
    const double half = 0.5 * radius_;
    if (t <= half) {
      out.value = 1.0;
      return out;
    }
    const double tau = (t - half) / half;
    const double t2 = tau * tau, t3 = t2 * tau, t4 = t3 * tau;
    const double s7 = 35.0 * t4 - 84.0 * t4 * tau + 70.0 * t4 * t2 - 20.0 * t4 * t3;
    const double ds7 = 140.0 * t3 - 420.0 * t4 + 420.0 * t4 * tau - 140.0 * t4 * t2;
    const double d2s7 = 420.0 * t2 - 1680.0 * t3 + 2100.0 * t4 - 840.0 * t4 * tau;
    const double phi = 1.0 - s7;
    const double dphi = -ds7 / half;        // d/dt
    const double d2phi = -d2s7 / (half * half);
    const Vec2 e{d.x / t, d.y / t};
    out.value = phi;
    out.grad = dphi * e;
    const double tang = dphi / t;
    out.hessian.xx = d2phi * e.x * e.x + tang * (1.0 - e.x * e.x);
    out.hessian.yy = d2phi * e.y * e.y + tang * (1.0 - e.y * e.y);
    out.hessian.xy = (d2phi - tang) * e.x * e.y;
    out.laplacian = d2phi + tang;
    return out;
  }

  nlohmann::json descriptor() const {
    nlohmann::json j{{"center", {center_.x, center_.y}}, {"radius", radius_}, {"order", order_}};
    if (kind_ == Kind::plateau) j["kind"] = "plateau";
    return j;
  }

 private:
  Vec2 center_;
  double radius_;
  int order_;
  Kind kind_;
};

}  // namespace jacdet
