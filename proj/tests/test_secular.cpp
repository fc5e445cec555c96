#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/secular.hpp"

using namespace perihelion;

TEST_CASE("mass parameters round trip") {
  const auto p = mass_params_from_betas(80.0, 80.0);
  CHECK(p.beta == doctest::Approx(80.0));
  CHECK(p.betabar == doctest::Approx(80.0));
  CHECK(p.mu == doctest::Approx(1.0));
  CHECK(p.kappa == doctest::Approx(21.8321595662).epsilon(1e-9));
  const auto q = derive_mass_params(p.mu, p.kappa);
  CHECK(q.beta == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(q.betabar == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(kappa_for_beta(1.0, 80.0) == doctest::Approx(p.kappa).epsilon(1e-12));
  CHECK(p.beta_lower <= p.beta_upper);
}

TEST_CASE("potential terms in the Jacobi frame") {
  const auto p = mass_params_from_betas(80.0, 60.0);
  const auto t = potential_terms(p);
  REQUIRE(t.size() == 2);
  CHECK(t[0].weight == doctest::Approx(60.0 / 140.0));
  CHECK(t[0].scale == doctest::Approx(80.0));
  CHECK(t[1].weight == doctest::Approx(80.0 / 140.0));
  CHECK(t[1].scale == doctest::Approx(-60.0));
}

TEST_CASE("averaged potential against the mean-anomaly oracle") {
  for (double b : {1.0, -1.0, 3.0, 80.0}) {
    for (auto [G, g] : std::initializer_list<std::pair<double, double>>{{0.5, 0.3}, {-0.7, 2.0}, {0.9, 4.4}}) {
      const double r = 5.0 * std::abs(b);
      const double U = averaged_potential(b, r, 1.0, 0.0, G, g, {1024});
      CHECK(U == doctest::Approx(oracle::averaged_inverse_distance(b, r, G, g, 2048)).epsilon(1e-12));
    }
  }
}

TEST_CASE("averaged potential refuses collisions") {
  // perihelion sits on x'
  CHECK_THROWS_AS(averaged_potential(1.0, 1.0 - std::sqrt(0.91), 1.0, 0.0, 0.3, kPi), DomainError);
}

TEST_CASE("Legendre averages against the oracle") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 8);
  for (int k = 0; k <= 8; ++k) {
    for (auto [G, g] : std::initializer_list<std::pair<double, double>>{{0.5, 0.3}, {-0.8, 2.0}}) {
      CHECK(table.legendre_average(k, G, g) ==
            doctest::Approx(oracle::legendre_average(k, G, g, 4096)).epsilon(1e-11).scale(1.0));
    }
  }
}

TEST_CASE("q_nu from the potential terms") {
  const auto params = mass_params_from_betas(80.0, 60.0);
  const auto table = CoeffTable::build(params, 9);
  const auto terms = potential_terms(params);
  const double b = table.reference_beta();
  for (int nu = 1; nu <= 9; ++nu) {
    double w = 0.0;
    for (const auto& t : terms) w += t.weight * std::pow(t.scale / b, nu);
    for (auto [G, g] : std::initializer_list<std::pair<double, double>>{{0.45, 1.3}, {-0.6, 5.0}}) {
      CHECK(table.q(nu, G, g) ==
            doctest::Approx(-w * oracle::legendre_average(nu, G, g, 4096)).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("equal masses: odd orders vanish and q2 has a closed form") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 10);
  double odd = 0.0, q2 = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double G = -1.0 + 2.0 * i / 49.0, g = kTwoPi * j / 49.0;
      for (int nu = 1; nu <= 9; nu += 2) odd = std::max(odd, std::abs(table.q(nu, G, g)));
      const double ref = -(5 - 3 * G * G) / 8.0 - 15.0 / 8.0 * (1 - G * G) * std::cos(2 * g);
      q2 = std::max(q2, std::abs(table.q(2, G, g) - ref));
    }
  }
  CHECK(odd <= 1e-10);
  CHECK(q2 <= 1e-10);
}

TEST_CASE("q_nu harmonics and derivatives") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 60.0), 8);
  const double h = 1e-6;
  for (int nu = 2; nu <= 8; ++nu) {
    for (auto [G, g] : std::initializer_list<std::pair<double, double>>{{0.3, 0.7}, {-0.85, 3.9}}) {
      double sum = 0.0;
      for (int m = 0; m <= nu; ++m) sum += table.tilde_q(nu, m, G) * std::cos(m * g);
      CHECK(sum == doctest::Approx(table.q(nu, G, g)).epsilon(1e-12).scale(1.0));
      const auto d = table.q_with_derivatives(nu, G, g);
      CHECK(d.value == doctest::Approx(table.q(nu, G, g)));
      CHECK(d.dG == doctest::Approx((table.q(nu, G + h, g) - table.q(nu, G - h, g)) / (2 * h)).epsilon(1e-7).scale(1.0));
      CHECK(d.dg == doctest::Approx((table.q(nu, G, g + h) - table.q(nu, G, g - h)) / (2 * h)).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("secular Hamiltonian: quadrature, series and oracle agree") {
  const auto params = mass_params_from_betas(80.0, 80.0);
  PlanarSecularState s{-0.006, -0.804, 652.256, 1.4524, 24.394, 1.0};
  const double quad = secular_hamiltonian(s, params, {4096});
  double pot = 0.0;
  for (const auto& t : potential_terms(params))
    pot -= t.weight * oracle::averaged_inverse_distance(t.scale, s.r, s.G, s.g, 2048);
  const double kinetic = 0.5 * s.R * s.R + (s.C - s.G) * (s.C - s.G) / (2 * s.r * s.r);
  CHECK(quad == doctest::Approx(kinetic + pot).epsilon(1e-12));
  const auto table = CoeffTable::build(params, 10);
  CHECK(std::abs(series_hamiltonian(s, table) - quad) <= 1e-10);
  const int nu = stabilized_nu_max(params, s);
  CHECK(nu >= 10);
  CHECK(nu <= 40);
}

TEST_CASE("slow Hamiltonian and fast equilibrium") {
  const auto [R0, r0] = fast_equilibrium(25.0);
  CHECK(R0 == 0.0);
  CHECK(r0 == doctest::Approx(625.0));
  CHECK_THROWS_AS(fast_equilibrium(0.0), DomainError);
  const double C = 25.0, b = 80.0, G = 0.4, g = 0.9;
  const double ref = (-2 * C * G + G * G) / (2 * r0 * r0) - b * b * (5 - 3 * G * G) / (8 * r0 * r0 * r0) -
                     15 * b * b * (1 - G * G) * std::cos(2 * g) / (8 * r0 * r0 * r0);
  CHECK(h_slow0(G, g, C, b, r0) == doctest::Approx(ref).epsilon(1e-14));
}
