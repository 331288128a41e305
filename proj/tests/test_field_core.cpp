#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jacdet/bump.hpp"
#include "jacdet/grid.hpp"
#include "jacdet/quadrature.hpp"
#include "jacdet/stencil.hpp"

using namespace jacdet;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec(4, 16, 0, 0, 0.1, 0.1), config_error);
  CHECK_THROWS_AS(GridSpec(16, 16, 0, 0, -0.1, 0.1), config_error);
  GridSpec g = GridSpec::over_rect(0, 0, 1, 2, 10, 20);
  CHECK(g.hx == Catch::Approx(0.1));
  CHECK(g.hy == Catch::Approx(0.1));
  CHECK(g.node_count() == 11u * 21u);
}

TEST_CASE("scalar field rejects non-finite samples") {
  GridSpec g = GridSpec::over_rect(0, 0, 1, 1, 8, 8);
  std::vector<double> vals(g.node_count(), 1.0);
  vals[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ScalarField(g, vals), config_error);
}

TEST_CASE("gradient exact on affine and quadratic fields") {
  GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, 64, 64);
  ScalarField fx = ScalarField::sample(g, [](double x, double) { return x; });
  VectorField gx = gradient(fx);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      CHECK(gx(i, j).x == Catch::Approx(1.0).margin(1e-13));
      CHECK(gx(i, j).y == Catch::Approx(0.0).margin(1e-13));
    }

  ScalarField fq = ScalarField::sample(g, [](double x, double) { return x * x; });
  VectorField gq = gradient(fq);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      CHECK(gq(i, j).x == Catch::Approx(2.0 * g.x(i)).margin(1e-12));
}

TEST_CASE("gradient second order on sin") {
  auto max_err = [](int n) {
    GridSpec g = GridSpec::over_rect(0, 0, 1, 1, n, n);
    ScalarField f = ScalarField::sample(g, [](double x, double) { return std::sin(x); });
    VectorField df = gradient(f);
    double worst = 0;
    for (int j = 1; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        worst = std::max(worst, std::abs(df(i, j).x - std::cos(g.x(i))));
    return worst;
  };
  double e32 = max_err(32), e64 = max_err(64);
  CHECK(e32 / e64 == Catch::Approx(4.0).margin(0.3));
}

TEST_CASE("trapezoid integration basics") {
  GridSpec g = GridSpec::over_rect(0, 0, 1, 1, 32, 32);
  ScalarField one = ScalarField::sample(g, [](double, double) { return 1.0; });
  CHECK(integrate(one) == Catch::Approx(1.0).margin(1e-14));

  // degree <= 1 per axis is integrated exactly
  ScalarField bilin = ScalarField::sample(g, [](double x, double y) { return 3 * x * y - y; });
  CHECK(integrate(bilin) == Catch::Approx(3.0 / 4.0 - 0.5).margin(1e-13));
}

TEST_CASE("weighted integral matches closed forms") {
  GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, 256, 256);
  TestBump psi({0, 0}, 1.0, 4);
  ScalarField one = ScalarField::sample(g, [](double, double) { return 1.0; });
  CHECK(integrate(one, psi) == Catch::Approx(M_PI / 5.0).margin(2e-4));

  ScalarField x1 = ScalarField::sample(g, [](double x, double) { return x; });
  CHECK(integrate(x1, psi) == Catch::Approx(0.0).margin(1e-12));

  TestBump escaping({0.9, 0.0}, 0.5, 4);
  CHECK_THROWS_AS(integrate(one, escaping), geometry_error);
}

TEST_CASE("bump derivatives closed form") {
  TestBump psi({0, 0}, 1.0, 4);
  auto at_center = psi.eval({0, 0});
  CHECK(at_center.value == 1.0);
  CHECK(at_center.grad.norm() == 0.0);

  auto outside = psi.eval({1.5, 0.2});
  CHECK(outside.value == 0.0);
  CHECK(outside.laplacian == 0.0);

  auto mid = psi.eval({0.5, 0.0});
  CHECK(mid.value == Catch::Approx(0.31640625).epsilon(1e-14));
  CHECK(mid.grad.x == Catch::Approx(-1.6875).epsilon(1e-14));
  CHECK(mid.grad.y == 0.0);
  CHECK(mid.hessian.xy == Catch::Approx(0.0).margin(1e-15));
  CHECK(mid.laplacian == Catch::Approx(mid.hessian.trace()));
}

TEST_CASE("bump hessian symmetric by construction and laplacian integrates to zero") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-0.4, 0.4);
  GridSpec g = GridSpec::over_rect(-1, -1, 1, 1, 200, 200);
  for (int trial = 0; trial < 5; ++trial) {
    TestBump psi({uni(rng), uni(rng)}, 0.5, 4);
    double total = integrate_nodes(g, [&](int i, int j) {
      return psi.eval(g.node(i, j)).laplacian;
    });
    CHECK(total == Catch::Approx(0.0).margin(1e-8));
  }
}

TEST_CASE("plateau bump is 1 on the inner half and C1-flat at the seams") {
  TestBump psi = TestBump::plateau({0, 0}, 0.8);
  CHECK(psi.eval({0.39, 0}).value == 1.0);
  CHECK(psi.eval({0.39, 0}).grad.norm() == 0.0);
  CHECK(psi.eval({0.81, 0}).value == 0.0);
  // finite-difference cross check of the analytic gradient in the band
  const double h = 1e-6;
  Vec2 x{0.57, 0.13};
  double num = (psi.value({x.x + h, x.y}) - psi.value({x.x - h, x.y})) / (2 * h);
  CHECK(psi.eval(x).grad.x == Catch::Approx(num).margin(1e-7));
}

TEST_CASE("field json round trip is bit exact") {
  GridSpec g = GridSpec::over_rect(-0.5, 0.25, 1.5, 2.25, 16, 16);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1e3, 1e3);
  ScalarField f = ScalarField::sample(g, [&](double, double) { return uni(rng); });
  ScalarField back = scalar_from_json(nlohmann::json::parse(to_json(f).dump()));
  REQUIRE(back.grid().same_as(g));
  for (std::size_t k = 0; k < f.values().size(); ++k) {
    // bit-exact, not approximately equal
    REQUIRE(std::memcmp(&f.values()[k], &back.values()[k], sizeof(double)) == 0);
  }

  VectorField v = VectorField::sample(g, [&](double, double) {
    return Vec2{uni(rng), uni(rng)};
  });
  VectorField vback = vector_from_json(nlohmann::json::parse(to_json(v).dump()));
  for (std::size_t k = 0; k < v.comp1().size(); ++k) {
    REQUIRE(std::memcmp(&v.comp1()[k], &vback.comp1()[k], sizeof(double)) == 0);
    REQUIRE(std::memcmp(&v.comp2()[k], &vback.comp2()[k], sizeof(double)) == 0);
  }
}

TEST_CASE("polar disk average of |x1| over unit disk") {
  double avg = disk_average({0, 0}, 1.0, [](const Vec2& x) { return std::abs(x.x); }, 2048, 48);
  CHECK(avg == Catch::Approx(4.0 / (3.0 * M_PI)).margin(1e-6));
}
