#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "jacdet/analytic.hpp"
#include "jacdet/estimates.hpp"
#include "jacdet/psolve.hpp"

using namespace jacdet;

TEST_CASE("gradient estimate ratio closed form") {
  FieldView lin = view_of(AnalyticSolution::affine(0.0, {1.0, 0.0}));
  auto rep = gradient_estimate_ratio(lin, {0, 0}, 1.0, "x1");
  CHECK(rep.measured_ratio == Catch::Approx(3.0 * M_PI / 4.0).margin(1e-4));

  SECTION("constants give ratio zero") {
    FieldView c = view_of(AnalyticSolution::affine(5.0, {0.0, 0.0}));
    CHECK(gradient_estimate_ratio(c, {0, 0}, 1.0).measured_ratio == 0.0);
  }
}

TEST_CASE("estimates are scale invariant") {
  FieldView ar = view_of(AnalyticSolution::aronsson());
  const Vec2 c{1.5, 1.5};
  const double r = 0.3;
  SECTION("gradient estimate") {
    double base = gradient_estimate_ratio(ar, c, r).measured_ratio;
    CHECK(gradient_estimate_ratio(scaled(ar, 7.0), c, r).measured_ratio ==
          Catch::Approx(base).epsilon(1e-9));
    CHECK(gradient_estimate_ratio(rescaled(ar, 3.0), {c.x / 3, c.y / 3}, r / 3).measured_ratio ==
          Catch::Approx(base).epsilon(1e-9));
  }
  SECTION("L4 bound") {
    double base = l4_bound_ratio(ar, c, 0.2).measured_ratio;
    CHECK(l4_bound_ratio(scaled(ar, 7.0), c, 0.2).measured_ratio ==
          Catch::Approx(base).epsilon(1e-9));
    CHECK(l4_bound_ratio(rescaled(ar, 2.0), {c.x / 2, c.y / 2}, 0.1).measured_ratio ==
          Catch::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("L4 bound basics") {
  SECTION("affine: finite ratio") {
    FieldView lin = view_of(AnalyticSolution::affine(0.0, {1.0, 0.0}));
    auto rep = l4_bound_ratio(lin, {0, 0}, 1.0);
    CHECK(std::isfinite(rep.measured_ratio));
    CHECK(rep.measured_ratio > 0.0);
  }
  SECTION("constant: ratio zero") {
    FieldView c = view_of(AnalyticSolution::affine(2.0, {0.0, 0.0}));
    CHECK(l4_bound_ratio(c, {0, 0}, 1.0).measured_ratio == 0.0);
  }
}

TEST_CASE("flatness bound with explicit constant 20") {
  SECTION("u = P holds with equality 0 <= 0") {
    AnalyticSolution aff = AnalyticSolution::affine(1.0, {2.0, -1.0});
    FieldView v = view_of(aff);
    Affine P{1.0, {2.0, -1.0}};
    FlatnessResult f = flatness_ratio(v, P, {0.2, -0.1}, 0.5);
    CHECK(f.lhs <= 1e-12);
    CHECK(f.rhs <= 1e-12);
    CHECK(f.pass);
  }
  SECTION("aronsson against its tangent affine") {
    AnalyticSolution a = AnalyticSolution::aronsson();
    FieldView v = view_of(a);
    AnalyticJet jet = a.jet({1.5, 1.5});
    Affine P{jet.value - jet.grad.dot({1.5, 1.5}), jet.grad};
    FlatnessResult f = flatness_ratio(v, P, {1.5, 1.5}, 0.25);
    CHECK(f.pass);
    CHECK(f.lhs < f.rhs);
  }
  SECTION("cone against a tangent plane away from the vertex") {
    AnalyticSolution cone = AnalyticSolution::cone({0.0, 0.0});
    FieldView v = view_of(cone);
    AnalyticJet jet = cone.jet({2.0, 0.0});
    Affine P{jet.value - jet.grad.dot({2.0, 0.0}), jet.grad};
    FlatnessResult f = flatness_ratio(v, P, {2.0, 0.0}, 0.4);
    CHECK(f.pass);
  }
}

TEST_CASE("cone comparison bound") {
  SECTION("u = P: equality") {
    AnalyticSolution aff = AnalyticSolution::affine(0.5, {1.0, 1.0});
    ConeComparisonResult cc =
        cone_comparison_bound(view_of(aff), Affine{0.5, {1.0, 1.0}}, {0, 0}, 1.0);
    CHECK(cc.pass);
    CHECK(cc.lhs == Catch::Approx(cc.rhs).margin(1e-12));
  }
  SECTION("cone with P = 0 on a vertex-centered ball") {
    AnalyticSolution cone = AnalyticSolution::cone({0.0, 0.0});
    ConeComparisonResult cc = cone_comparison_bound(view_of(cone), Affine{}, {0, 0}, 1.0);
    CHECK(cc.lhs == Catch::Approx(1.0));
    CHECK(cc.rhs >= 1.0);  // 2 sup |x|/1 over B(0,2) = 4
    CHECK(cc.pass);
  }
  SECTION("aronsson with tangent affine") {
    AnalyticSolution a = AnalyticSolution::aronsson();
    AnalyticJet jet = a.jet({1.5, 1.5});
    Affine P{jet.value - jet.grad.dot({1.5, 1.5}), jet.grad};
    ConeComparisonResult cc = cone_comparison_bound(view_of(a), P, {1.5, 1.5}, 0.2);
    CHECK(cc.pass);
  }
}

TEST_CASE("jacobian mass bound") {
  AnalyticSolution a = AnalyticSolution::aronsson();
  FieldView ar = view_of(a);
  SECTION("affine: zero mass, zero rhs, no violation") {
    AnalyticSolution aff = AnalyticSolution::affine(1.0, {2.0, -1.0});
    GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, 64, 64);
    ScalarField u = analytic_eval(aff, g).u;
    MassBoundResult m = jacobian_mass_bound(u, view_of(aff), {0, 0}, 0.8);
    CHECK(std::abs(m.mass) <= 1e-10);
    CHECK(m.rhs <= 1e-10);
    CHECK_FALSE(m.violation);
  }
  SECTION("aronsson: stable empirical constant under refinement") {
    double cprev = 0;
    for (int n : {128, 256}) {
      GridSpec g = GridSpec::over_rect(1.125, 1.125, 1.875, 1.875, n, n);
      ScalarField u = analytic_eval(a, g).u;
      MassBoundResult m = jacobian_mass_bound(u, ar, {1.5, 1.5}, 0.6);
      CHECK(m.mass > 0.0);
      CHECK(std::isfinite(m.c_emp));
      if (cprev != 0) CHECK(m.c_emp == Catch::Approx(cprev).epsilon(0.10));
      cprev = m.c_emp;
    }
  }
}

TEST_CASE("liouville bookkeeping") {
  SECTION("affine data: conclusion holds exactly") {
    FieldView aff = view_of(AnalyticSolution::affine(1.0, {2.0, -1.0}));
    LiouvilleResult lr = liouville_residual(aff, {1, 2, 4, 8});
    for (const auto& row : lr.rows) CHECK(row.affine_residual <= 1e-12);
    // The hypothesis functional is R-independent for affine data.
    for (std::size_t k = 1; k < lr.rows.size(); ++k)
      CHECK(lr.rows[k].h == Catch::Approx(lr.rows[0].h).epsilon(1e-9));
  }
  SECTION("aronsson grows like R^{1/3}") {
    FieldView ar = view_of(AnalyticSolution::aronsson());
    LiouvilleResult lr = liouville_residual(ar, {1, 2, 4, 8, 16});
    CHECK(lr.growth_exponent == Catch::Approx(1.0 / 3.0).margin(0.03));
  }
  SECTION("vertex-centered cone plateaus at a positive constant") {
    FieldView cone = view_of(AnalyticSolution::cone({0.0, 0.0}));
    LiouvilleResult lr = liouville_residual(cone, {1, 2, 4, 8});
    CHECK(lr.rows[0].h > 0.1);
    for (std::size_t k = 1; k < lr.rows.size(); ++k)
      CHECK(lr.rows[k].h == Catch::Approx(lr.rows[0].h).epsilon(1e-6));
    CHECK(std::abs(lr.growth_exponent) <= 1e-4);
  }
}

TEST_CASE("mass bound on a solved field lands near the analytic-input value") {
  AnalyticSolution a = AnalyticSolution::aronsson();
  FieldView ar = view_of(a);
  GridSpec g = GridSpec::over_rect(1.125, 1.125, 1.875, 1.875, 128, 128);
  ScalarField exact = analytic_eval(a, g).u;
  MassBoundResult analytic = jacobian_mass_bound(exact, ar, {1.5, 1.5}, 0.6);

  SolveResult solved = solve_pharmonic(g, 32.0, boundary_from(a));
  VectorField du = gradient(solved.field);
  FieldView solved_view = view_of(solved.field, du);
  MassBoundResult numeric = jacobian_mass_bound(solved.field, solved_view, {1.5, 1.5}, 0.6);
  CHECK(numeric.c_emp > 0.0);
  CHECK(numeric.c_emp <= 2.0 * analytic.c_emp);
  CHECK(numeric.c_emp >= 0.5 * analytic.c_emp);
}
