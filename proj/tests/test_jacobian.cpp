#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jacdet/analytic.hpp"
#include "jacdet/jacobian.hpp"
#include "jacdet/psolve.hpp"

using namespace jacdet;

TEST_CASE("complex gradient componentwise") {
  GridSpec g = GridSpec::over_rect(0, 0, 1, 1, 8, 8);
  SECTION("unit gradient, beta = 0") {
    VectorField du = VectorField::sample(g, [](double, double) { return Vec2{1.0, 0.0}; });
    ComplexGradientField cg = complex_gradient(du, 0.0);
    CHECK(cg.V(4, 4).x == Catch::Approx(1.0));
    CHECK(cg.V(4, 4).y == Catch::Approx(0.0));
    CHECK(cg.speed(4, 4) == Catch::Approx(1.0));
  }
  SECTION("(3,4) with beta = 1") {
    VectorField du = VectorField::sample(g, [](double, double) { return Vec2{3.0, 4.0}; });
    ComplexGradientField cg = complex_gradient(du, 1.0);
    CHECK(cg.V(2, 3).x == Catch::Approx(15.0));
    CHECK(cg.V(2, 3).y == Catch::Approx(-20.0));
    CHECK(cg.speed(2, 3) == Catch::Approx(25.0));
    // |V| = speed wherever the node is not flagged
    CHECK(cg.V(2, 3).norm() == Catch::Approx(cg.speed(2, 3)));
    CHECK(cg.masked_area == 0.0);
  }
  SECTION("vanishing gradient with beta < 0 flags the node") {
    VectorField du = VectorField::sample(g, [](double x, double) {
      return x < 0.5 ? Vec2{0.0, 0.0} : Vec2{1.0, 0.0};
    });
    ComplexGradientField cg = complex_gradient(du, -0.5);
    CHECK(cg.mask[g.index(0, 0)] == 1);
    CHECK(cg.V(0, 0).norm() == 0.0);
    CHECK(cg.masked_area > 0.0);
  }
  SECTION("bad beta refuses") {
    VectorField du = VectorField::sample(g, [](double, double) { return Vec2{1.0, 0.0}; });
    CHECK_THROWS_AS(complex_gradient(du, -1.0), config_error);
  }
}

TEST_CASE("pointwise determinant on the saddle") {
  GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, 64, 64);
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * y; });
  SECTION("beta = 0: det is identically 1") {
    PointwiseDet pd = pointwise_det(u, 0.0);
    for (int j = 1; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        CHECK(pd.det(i, j) == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("beta = 1, p = 2: the p-harmonic form gives 2|x|^2") {
    PointwiseDet pd = pointwise_det(u, 1.0, 2.0);
    REQUIRE(pd.det_pharmonic.has_value());
    for (int j = 8; j < g.ny - 8; ++j)
      for (int i = 8; i < g.nx - 8; ++i) {
        Vec2 x = g.node(i, j);
        if (x.norm() < 0.2) continue;  // flagged near the critical point
        CHECK((*pd.det_pharmonic)(i, j) ==
              Catch::Approx(2.0 * x.norm2()).margin(5e-3));
        CHECK(pd.det(i, j) == Catch::Approx(2.0 * x.norm2()).margin(5e-3));
      }
  }
  SECTION("affine input: det vanishes for any beta") {
    ScalarField aff = ScalarField::sample(g, [](double x, double y) { return 1 + 2 * x - y; });
    for (double beta : {-0.5, 0.0, 1.5}) {
      PointwiseDet pd = pointwise_det(aff, beta);
      for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) CHECK(std::abs(pd.det(i, j)) <= 1e-10);
    }
  }
  SECTION("beta < 0 with vanishing gradient requires eps") {
    CHECK_THROWS_AS(pointwise_det(u, -0.5), precondition_error);
    CHECK_NOTHROW(pointwise_det(u, -0.5, std::nullopt, 0.25));
  }
}

TEST_CASE("polynomial pointwise determinant matches the sampled-field one") {
  PolyField v = PolyField::monomial(1, 1, 1.0) + PolyField::monomial(3, 0, 0.25);
  GridSpec g = GridSpec::over_rect(0.2, 0.2, 1.2, 1.2, 32, 32);
  ScalarField u = ScalarField::sample(g, [&](double x, double y) { return v(x, y); });
  for (double beta : {0.0, 1.0}) {
    PointwiseDet exact = pointwise_det(v, g, beta);
    PointwiseDet approx = pointwise_det(u, beta);
    for (int j = 2; j < g.ny - 2; ++j)
      for (int i = 2; i < g.nx - 2; ++i)
        CHECK(approx.det(i, j) == Catch::Approx(exact.det(i, j)).margin(2e-2));
  }
}

TEST_CASE("weak pairing on the saddle benchmark") {
  GridSpec g = GridSpec::over_rect(-1.25, -1.25, 1.25, 1.25, 320, 320);  // h = 1/128
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * y; });
  TestBump psi({0, 0}, 1.0, 4);
  PairingReport rep = weak_det_pairing(u, 0.0, psi);
  CHECK(rep.pairing == Catch::Approx(M_PI / 5.0).margin(5e-3));
  CHECK(std::abs(rep.pairing - rep.lower_rhs) <= 1e-3);
  CHECK(rep.mode == "weak");
}

TEST_CASE("weak pairing of affine fields vanishes") {
  GridSpec g = GridSpec::over_rect(-1.25, -1.25, 1.25, 1.25, 96, 96);
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return 2 + x - 3 * y; });
  TestBump psi({0, 0}, 1.0, 4);
  for (double beta : {-0.5, 0.0, 1.0})
    CHECK(std::abs(weak_det_pairing(u, beta, psi).pairing) <= 1e-12);
}

TEST_CASE("support violations raise domain errors") {
  GridSpec g = GridSpec::over_rect(0, 0, 1, 1, 16, 16);
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * y; });
  CHECK_THROWS_AS(weak_det_pairing(u, 0.0, TestBump({0.9, 0.5}, 0.5, 4)), geometry_error);
}

TEST_CASE("scaling covariance: pairing scales like lambda^{2beta+2}") {
  GridSpec g = GridSpec::over_rect(-1.25, -1.25, 1.25, 1.25, 128, 128);
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * y + 0.2 * x * x; });
  TestBump psi({0, 0}, 1.0, 4);
  for (double beta : {0.0, 0.5, 1.0}) {
    const double lambda = 3.0;
    ScalarField lu = ScalarField::sample(g, [&](double x, double y) {
      return lambda * (x * y + 0.2 * x * x);
    });
    double base = weak_det_pairing(u, beta, psi).pairing;
    double scaled = weak_det_pairing(lu, beta, psi).pairing;
    CHECK(scaled == Catch::Approx(std::pow(lambda, 2 * beta + 2) * base).epsilon(1e-10));
  }
}

TEST_CASE("beta = 0 pairing is invariant under adding an affine function") {
  GridSpec g = GridSpec::over_rect(-1.25, -1.25, 1.25, 1.25, 128, 128);
  ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * y; });
  ScalarField up = ScalarField::sample(g, [](double x, double y) {
    return x * y + 5.0 - 3.0 * x + 0.7 * y;
  });
  TestBump psi({0, 0}, 1.0, 4);
  double a = weak_det_pairing(u, 0.0, psi).pairing;
  double b = weak_det_pairing(up, 0.0, psi).pairing;
  CHECK(b == Catch::Approx(a).epsilon(1e-10));
}

TEST_CASE("pointwise-vs-weak oracle equivalence at second order") {
  PolyField v = PolyField::monomial(1, 1, 1.0) + PolyField::monomial(2, 2, 0.3);
  TestBump psi({0, 0}, 1.0, 4);
  auto gap_at = [&](int n, double beta) {
    GridSpec g = GridSpec::over_rect(-1.25, -1.25, 1.25, 1.25, n, n);
    ScalarField u = ScalarField::sample(g, [&](double x, double y) { return v(x, y); });
    double weak = weak_det_pairing(u, beta, psi).pairing;
    double pw = pairing_from_pointwise(pointwise_det(v, g, beta), beta, psi).pairing;
    return std::abs(weak - pw);
  };
  for (double beta : {0.0, 1.0}) {
    double e1 = gap_at(128, beta), e2 = gap_at(256, beta);
    INFO("beta " << beta << " gaps " << e1 << " " << e2);
    CHECK((e2 <= 1e-11 || e1 / e2 >= std::pow(2.0, 1.7)));
  }
}

TEST_CASE("orthogonality residual for the Aronsson field decays at O(h^2)") {
  auto orth = [](int n) {
    GridSpec g = GridSpec::over_rect(1, 1, 2, 2, n, n);
    ScalarField u = analytic_eval(AnalyticSolution::aronsson(), g).u;
    return std::abs(weak_det_pairing(u, 1.0, TestBump({1.5, 1.5}, 0.4, 4), true)
                        .orthogonality_residual);
  };
  double e1 = orth(64), e2 = orth(128);
  CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("aronsson lower bound and nonnegativity") {
  GridSpec g = GridSpec::over_rect(1, 1, 2, 2, 128, 128);
  ScalarField u = analytic_eval(AnalyticSolution::aronsson(), g).u;
  TestBump psi({1.5, 1.5}, 0.4, 4);
  PairingReport rep = weak_det_pairing(u, 0.0, psi);
  CHECK(rep.pairing > 0.0);
  CHECK(rep.lower_rhs > 0.0);
  CHECK(rep.pairing >= rep.lower_rhs - 1e-3);
}

TEST_CASE("bound verdicts") {
  GridSpec g = GridSpec::over_rect(1, 1, 2, 2, 128, 128);
  ScalarField u = analytic_eval(AnalyticSolution::aronsson(), g).u;
  TestBump psi({1.5, 1.5}, 0.2, 4);
  SECTION("aronsson passes with finite empirical constant") {
    BoundsVerdict v = check_bounds(u, 0.5, psi, {1.5, 1.5}, 0.45);
    CHECK(v.lower_ok);
    CHECK(v.nonneg_ok);
    CHECK(std::isfinite(v.c_emp));
    CHECK(v.pass);
  }
  SECTION("affine input: zero mass against zero bound") {
    ScalarField aff = ScalarField::sample(g, [](double x, double y) { return 1 + x - y; });
    BoundsVerdict v = check_bounds(aff, 0.0, psi, {1.5, 1.5}, 0.45);
    CHECK(v.lower_ok);
    CHECK(std::abs(v.lower_report.pairing) <= 1e-12);
    CHECK(std::abs(v.upper_report.pairing) <= 1e-12);
  }
  SECTION("ball escaping the grid raises") {
    CHECK_THROWS_AS(check_bounds(u, 0.0, psi, {1.9, 1.9}, 0.45), geometry_error);
  }
}

TEST_CASE("sweep pairings bookkeeping") {
  GridSpec g = GridSpec::over_rect(1, 1, 2, 2, 48, 48);
  AnalyticSolution ar = AnalyticSolution::aronsson();
  auto solves = infinity_approx(g, boundary_from(ar), {4, 8, 16});
  std::vector<ScalarField> fields;
  for (auto& s : solves) fields.push_back(s.field);
  ScalarField uinf = analytic_eval(ar, g).u;
  TestBump psi({1.5, 1.5}, 0.4, 4);
  SweepPairings sp = weak_convergence_pairings(fields, {4, 8, 16}, uinf, 0.0, psi);
  REQUIRE(sp.rows.size() == 3);
  CHECK(sp.rows[1].gap_to_limit < sp.rows[0].gap_to_limit);
  CHECK(sp.rows[2].gap_to_limit < sp.rows[1].gap_to_limit);

  SECTION("affine family gives all-zero pairings") {
    AnalyticSolution aff = AnalyticSolution::affine(1.0, {1.0, 1.0});
    auto asolves = infinity_approx(g, boundary_from(aff), {4, 8});
    std::vector<ScalarField> afields;
    for (auto& s : asolves) afields.push_back(s.field);
    SweepPairings asp =
        weak_convergence_pairings(afields, {4, 8}, analytic_eval(aff, g).u, 0.0, psi);
    CHECK(std::abs(asp.pairing_limit) <= 1e-12);
    for (auto& row : asp.rows) CHECK(std::abs(row.pairing) <= 1e-10);
  }
  SECTION("grid mismatch refuses") {
    GridSpec g2 = GridSpec::over_rect(1, 1, 2, 2, 32, 32);
    ScalarField other = analytic_eval(ar, g2).u;
    CHECK_THROWS_AS(weak_convergence_pairings(fields, {4, 8, 16}, other, 0.0, psi),
                    config_error);
  }
}

TEST_CASE("masked area stays O(h^2) for a field with one critical point") {
  auto masked = [](int n) {
    GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, n, n);
    ScalarField u = ScalarField::sample(g, [](double x, double y) { return x * x + y * y; });
    PointwiseDet pd = pointwise_det(u, 0.5);
    return pd.masked_area;
  };
  // Only the origin node can fall below the floor; its trapezoid cell shrinks.
  CHECK(masked(32) <= 2.0 * (2.0 / 32) * (2.0 / 32));
  CHECK(masked(64) <= 2.0 * (2.0 / 64) * (2.0 / 64));
}
