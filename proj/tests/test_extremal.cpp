#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "jacdet/extremal.hpp"

using namespace jacdet;

TEST_CASE("parameter constants") {
  SECTION("p = 2 degenerates to the identity data") {
    ExtremalParams par(2.0);
    CHECK(par.d == Catch::Approx(1.0).margin(1e-15));
    CHECK(par.eps_map == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("p = 10 matches the closed-form constants") {
    ExtremalParams par(10.0);
    CHECK(par.d == Catch::Approx(0.45226).margin(1e-5));
    CHECK(par.eps_map == Catch::Approx(0.23241).margin(1e-5));
  }
  SECTION("eps_map stays below 1/3 over the whole p range") {
    for (double p : {1.01, 1.5, 2.0, 3.0, 7.0, 25.0, 200.0})
      CHECK(std::abs(ExtremalParams(p).eps_map) < 1.0 / 3.0);
  }
  CHECK_THROWS_AS(ExtremalParams(0.5), config_error);
}

TEST_CASE("map H basics") {
  SECTION("p = 2: H is the identity") {
    ExtremalParams par(2.0);
    for (cx xi : {cx(1.0, 0.0), cx(-0.3, 0.8), cx(0.0, -2.0)})
      CHECK(std::abs(map_H(par, xi) - xi) <= 1e-14);
  }
  SECTION("H(1) = 1 + eps") {
    ExtremalParams par(10.0);
    CHECK(std::abs(map_H(par, cx(1.0, 0.0)) - cx(1.0 + par.eps_map, 0.0)) <= 1e-15);
  }
  SECTION("homogeneity H(t xi) = t^{1/d} H(xi)") {
    ExtremalParams par(4.0);
    for (double t : {0.5, 2.0, 10.0}) {
      cx xi(0.7, -0.4);
      cx lhs = map_H(par, t * xi);
      cx rhs = std::pow(t, par.inv_d) * map_H(par, xi);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
  CHECK(map_H(ExtremalParams(4.0), cx(0, 0)) == cx(0, 0));
}

TEST_CASE("Wirtinger derivatives of H against complex finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (double p : {1.5, 3.0, 10.0}) {
    ExtremalParams par(p);
    for (int t = 0; t < 40; ++t) {
      cx xi(uni(rng), uni(rng));
      if (std::abs(xi) < 0.3) continue;
      const double h = 1e-6;
      cx fx = (map_H(par, xi + h) - map_H(par, xi - h)) / (2.0 * h);
      cx fy = (map_H(par, xi + cx(0, h)) - map_H(par, xi - cx(0, h))) / (2.0 * h);
      cx dxi = 0.5 * (fx - cx(0, 1) * fy);
      cx dbar = 0.5 * (fx + cx(0, 1) * fy);
      WirtingerPair d = derivatives_H(par, xi);
      CHECK(std::abs(d.d - dxi) <= 1e-6 * (1.0 + std::abs(dxi)));
      CHECK(std::abs(d.dbar - dbar) <= 1e-6 * (1.0 + std::abs(dbar)));
    }
  }
  CHECK_THROWS_AS(derivatives_H(ExtremalParams(4.0), cx(0, 0)), geometry_error);
}

TEST_CASE("real-axis distortion of H equals |p-2|/p") {
  for (double p : {1.5, 4.0, 10.0}) {
    ExtremalParams par(p);
    WirtingerPair d = derivatives_H(par, cx(1.3, 0.0));
    CHECK(std::abs(d.dbar) / std::abs(d.d) == Catch::Approx(std::abs(p - 2.0) / p).margin(1e-12));
  }
  SECTION("p = 2 is conformal everywhere") {
    ExtremalParams par(2.0);
    for (cx xi : {cx(1.0, 0.2), cx(-0.5, 0.9)})
      CHECK(std::abs(derivatives_H(par, xi).dbar) <= 1e-15);
  }
  SECTION("off-axis samples stay below the bound") {
    ExtremalParams par(10.0);
    cx xi = std::polar(1.0, M_PI / 7.0);
    WirtingerPair d = derivatives_H(par, xi);
    CHECK(std::abs(d.dbar) / std::abs(d.d) <= 0.8 + 1e-12);
  }
}

TEST_CASE("inverse map round trip and homogeneity") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.5, 2.0), ut(0.0, 2.0 * M_PI);
  for (double p : {1.5, 2.0, 4.0, 10.0}) {
    ExtremalParams par(p);
    SECTION("f(H(xi)) = xi on the annulus, p = " + std::to_string(p)) {
      double worst = 0;
      for (int t = 0; t < 1000; ++t) {
        cx xi = std::polar(ur(rng), ut(rng));
        cx back = inverse_f(par, map_H(par, xi));
        worst = std::max(worst, std::abs(back - xi));
      }
      CHECK(worst <= 1e-10);
    }
    SECTION("H(f(z)) = z, p = " + std::to_string(p)) {
      double worst = 0;
      for (int t = 0; t < 200; ++t) {
        cx z = std::polar(ur(rng), ut(rng));
        worst = std::max(worst, std::abs(map_H(par, inverse_f(par, z)) - z));
      }
      CHECK(worst <= 1e-10);
    }
  }
  SECTION("p = 2: f is the identity") {
    ExtremalParams par(2.0);
    CHECK(std::abs(inverse_f(par, cx(0.3, -1.1)) - cx(0.3, -1.1)) <= 1e-12);
  }
  SECTION("homogeneity f(t z) = t^d f(z)") {
    ExtremalParams par(10.0);
    for (double t : {2.0, 10.0}) {
      cx z(0.8, 0.45);
      cx lhs = inverse_f(par, t * z);
      cx rhs = std::pow(t, par.d) * inverse_f(par, z);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("distortion sup matches the sharp constant") {
  struct Case {
    double p, beta;
  };
  for (Case c : {Case{2.0, 0.0}, Case{3.0, 1.0}, Case{10.0, 0.0}, Case{1.5, -0.5},
                 Case{10.0, 2.0}}) {
    ExtremalParams par(c.p);
    DistortionReport rep = distortion_sup(par, c.beta);
    INFO("p = " << c.p << " beta = " << c.beta);
    CHECK(std::abs(rep.ratio_sup - rep.target_ratio) <= 1e-8);
    CHECK(rep.sup_on_predicted_ray);
    CHECK(rep.quasireg_worst_slack >= -1e-9);
    auto [lhs, rhs] = sharpness_constants(par, c.beta);
    CHECK(std::abs(lhs - rhs) <= 1e-6);
  }
  SECTION("explicit K values") {
    CHECK(distortion_K(10.0, 0.0) == Catch::Approx(9.0));
    CHECK(distortion_K(3.0, 1.0) == Catch::Approx(2.0));
    CHECK(distortion_K(2.0, 0.0) == Catch::Approx(1.0));
    CHECK(distortion_K(1.5, -0.5) == Catch::Approx(2.0));
  }
  SECTION("p = 3, beta = 1 target ratio is 1/3") {
    DistortionReport rep = distortion_sup(ExtremalParams(3.0), 1.0);
    CHECK(rep.target_ratio == Catch::Approx(1.0 / 3.0));
    CHECK(rep.ratio_sup == Catch::Approx(1.0 / 3.0).margin(1e-8));
  }
}

TEST_CASE("annulus energies of |D log f|^2") {
  SECTION("p = 2: radial identity energy, zero angular excess") {
    auto rows = annulus_log_energy(ExtremalParams(2.0), 0, 4);
    for (const auto& e : rows) {
      CHECK(e.energy == Catch::Approx(2.0 * M_PI * std::log(2.0)).epsilon(1e-10));
      CHECK(std::abs(e.angular_energy) <= 1e-9);
    }
  }
  for (double p : {1.5, 4.0}) {
    SECTION("constant across dyadic annuli, p = " + std::to_string(p)) {
      auto rows = annulus_log_energy(ExtremalParams(p), 0, 6);
      REQUIRE(rows.size() == 7);
      for (std::size_t k = 1; k < rows.size(); ++k)
        CHECK(rows[k].energy == Catch::Approx(rows[0].energy).epsilon(1e-4));
      CHECK(rows[0].angular_energy > 1e-3);  // genuinely non-conformal
    }
  }
}
