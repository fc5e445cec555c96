#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/orbital_core.hpp"

using namespace perihelion;

TEST_CASE("kepler solver agrees with bisection") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ue(0.0, 0.999), ul(-20.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const double e = ue(rng), ell = ul(rng);
    const double xi = solve_kepler(e, ell);
    CHECK(xi == doctest::Approx(oracle::kepler_bisect(e, ell)).epsilon(1e-13));
    CHECK(std::abs(xi - e * std::sin(xi) - ell) <= 1e-13);
  }
}

TEST_CASE("kepler edge cases") {
  CHECK(solve_kepler(0.0, 1.234) == doctest::Approx(1.234));
  CHECK(solve_kepler(0.9, 0.0) == doctest::Approx(0.0));
  CHECK(solve_kepler(0.9, kPi) == doctest::Approx(kPi));
  CHECK_THROWS_AS(solve_kepler(1.0, 0.5), ConvergenceError);
  CHECK_THROWS_AS(solve_kepler(-0.1, 0.5), ConvergenceError);
  // Lambda, G form uses e = sqrt(1 - G^2 / Lambda^2)
  CHECK(solve_kepler(2.0, 1.0, 0.7) == doctest::Approx(solve_kepler(std::sqrt(0.75), 0.7)));
}

TEST_CASE("radial kepler solves the e = 1 equation") {
  for (double x : {1e-3, 0.1, 1.0, 3.0, kPi, 5.0, 6.2}) {
    const double xi = solve_radial_kepler(x);
    CHECK(std::abs(xi - std::sin(xi) - x) <= 1e-13);
    CHECK(xi > 0.0);
    CHECK(xi < kTwoPi);
  }
}

TEST_CASE("eccentricity and element validation") {
  CHECK(eccentricity(1.0, 0.6) == doctest::Approx(0.8));
  CHECK(eccentricity(1.0, -0.6) == doctest::Approx(0.8));
  OrbitalElements el;
  el.G = 1.2;
  CHECK_THROWS_AS(el.validate(), DomainError);
  el.G = 0.5;
  el.Theta = 0.6;
  CHECK_THROWS_AS(el.validate(), DomainError);
}

TEST_CASE("ellipse factors match the oracle geometry") {
  OrbitalElements el;
  el.G = 0.55;
  el.g = 0.8;
  el.ell = 2.1;
  const auto f = ellipse_factors(el);
  const auto p = oracle::ellipse_position(el.G, el.g, el.ell);
  // p is minus the projection of x on x'
  CHECK(f.p == doctest::Approx(-p.x).epsilon(1e-12));
  CHECK(f.varrho == doctest::Approx(std::hypot(p.x, p.y)).epsilon(1e-12));
  const double e = f.e;
  CHECK(std::tan(0.5 * f.nu) ==
        doctest::Approx(std::sqrt((1 + e) / (1 - e)) * std::tan(0.5 * f.xi)).epsilon(1e-10));
}

TEST_CASE("C1 maps onto the level sqrt(1 - G^2) cos g = calG") {
  for (double cg : {0.3, -0.3, 0.9, -0.95}) {
    for (double gamma = 0.0; gamma < kTwoPi; gamma += 0.37) {
      const auto [G, g] = c1_to_orbital({cg, gamma});
      CHECK(std::sqrt(1.0 - G * G) * std::cos(g) == doctest::Approx(cg).epsilon(1e-12));
      CHECK(g >= 0.0);
      CHECK(g < kTwoPi);
    }
  }
  CHECK_THROWS_AS(c1_to_orbital({0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(c1_to_orbital({1.0, 1.0}), DomainError);
}

namespace {
double jacobian_det(auto map, double a, double b) {
  const double h = 1e-6;
  const auto pa = map(a + h, b), ma = map(a - h, b), pb = map(a, b + h), mb = map(a, b - h);
  const double d11 = (pa.first - ma.first) / (2 * h), d21 = (pa.second - ma.second) / (2 * h);
  const double d12 = (pb.first - mb.first) / (2 * h), d22 = (pb.second - mb.second) / (2 * h);
  return d11 * d22 - d12 * d21;
}
}  // namespace

TEST_CASE("C1 and C2 preserve area") {
  auto c1 = [](double cg, double gamma) {
    auto [G, g] = c1_to_orbital({cg, gamma});
    return std::pair<double, double>{G, g};
  };
  for (double cg : {0.2, 0.6, -0.5})
    for (double gamma : {0.3, 1.9, 4.0}) CHECK(std::abs(jacobian_det(c1, cg, gamma)) == doctest::Approx(1.0).epsilon(1e-6));
  auto c2 = [](double y, double x) { return c2_to_radial({y, x}); };
  for (double y : {0.5, 1.0, 3.0})
    for (double x : {0.4, 2.0, 4.5}) CHECK(std::abs(jacobian_det(c2, y, x)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("C2 energy identity and branch") {
  for (double y : {0.3, 1.0, 2.5}) {
    for (double x = 0.05; x < kTwoPi; x += 0.2) {
      const auto [R, r] = c2_to_radial({y, x});
      CHECK(0.5 * R * R - 1.0 / r == doctest::Approx(-0.5 / (y * y)).epsilon(1e-12));
      const double xi = solve_radial_kepler(x);
      if (x <= kPi) {
        const double c = std::cos(xi);
        CHECK(R == doctest::Approx(std::sqrt((1 + c) / (1 - c)) / y).epsilon(1e-12));
      }
      CHECK((R >= 0.0) == (std::sin(xi) >= 0.0));
    }
  }
  CHECK_THROWS_AS(c2_to_radial({0.0, 1.0}), DomainError);
}
