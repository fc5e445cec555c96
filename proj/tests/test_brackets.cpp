#include <cmath>

#include "doctest.h"
#include "perihelion/brackets.hpp"
#include "perihelion/euler_center.hpp"

using namespace perihelion;

TEST_CASE("canonical brackets in (G, g)") {
  auto G = [](double G, double) { return G; };
  auto g = [](double, double g) { return g; };
  CHECK(bracket_Gg(g, G, 0.3, 1.0) == doctest::Approx(1.0));
  CHECK(bracket_Gg(G, g, 0.3, 1.0) == doctest::Approx(-1.0));
  auto f = [](double G, double g) { return G * G * std::sin(g); };
  auto h = [](double G, double g) { return G + std::cos(g); };
  // f_g h_G - f_G h_g
  const double G0 = 0.4, g0 = 0.9;
  const double ref = G0 * G0 * std::cos(g0) * 1.0 - 2 * G0 * std::sin(g0) * (-std::sin(g0));
  CHECK(bracket_Gg(f, h, G0, g0) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(bracket_Gg(f, f, G0, g0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("cartesian bracket of position and momentum") {
  CartesianState s{{0.1, 0.2, 0.3}, {1.0, -0.5, 0.25}};
  for (int i = 0; i < 3; ++i) {
    auto xi = [i](const CartesianState& c) { return c.x[i]; };
    auto yi = [i](const CartesianState& c) { return c.y[i]; };
    CHECK(bracket_cartesian(xi, yi, s) == doctest::Approx(1.0));
  }
  // angular momentum components: {M_x, M_y} = +-M_z depending on convention;
  // the magnitude is fixed
  auto Mx = [](const CartesianState& c) { return angular_momentum(c)[0]; };
  auto My = [](const CartesianState& c) { return angular_momentum(c)[1]; };
  CHECK(std::abs(bracket_cartesian(Mx, My, s)) == doctest::Approx(std::abs(angular_momentum(s)[2])));
}

TEST_CASE("E0 commutes with the averaged potential") {
  for (double r : {3.0, 7.5, 15.0})
    CHECK(std::abs(ue0_bracket(r, 0.35, 1.2)) < 1e-8);
  // a function that is not a function of E0 does not commute
  auto G = [](double G, double) { return G; };
  auto E0 = [](double G, double g) { return e0_planar(3.0, G, g); };
  CHECK(std::abs(bracket_Gg(G, E0, 0.35, 1.2)) > 0.1);
}
