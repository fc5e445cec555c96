#include <cmath>

#include "doctest.h"
#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/flow.hpp"

using namespace perihelion;

namespace {

struct Oscillator {
  static constexpr std::size_t dim = 2;
  void operator()(const State<2>& x, State<2>& d, double) const {
    d[0] = x[1];
    d[1] = -x[0];
  }
  double energy(const State<2>& x) const { return 0.5 * (x[0] * x[0] + x[1] * x[1]); }
};

}  // namespace

TEST_CASE("RKF78 reproduces the harmonic oscillator") {
  Oscillator osc;
  const auto traj = integrate(osc, State<2>{1.0, 0.0}, 0.0, 20.0, {1e-12, 1e-12});
  CHECK(traj.x.back()[0] == doctest::Approx(std::cos(20.0)).epsilon(1e-10));
  CHECK(traj.x.back()[1] == doctest::Approx(-std::sin(20.0)).epsilon(1e-10));
  CHECK(traj.relative_energy_drift() < 1e-10);
  const auto back = integrate(osc, traj.x.back(), 20.0, 0.0, {1e-12, 1e-12});
  CHECK(back.x.back()[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(back.x.back()[1]) < 1e-9);
}

TEST_CASE("events: direction, refinement and min_time") {
  Oscillator osc;
  EventSpec<2> up{[](const State<2>& x, double, const State<2>&) { return x[0]; }, Direction::increasing};
  auto hit = integrate_to_event(osc, State<2>{1.0, 0.0}, 0.0, 10.0, up);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.5 * kPi).epsilon(1e-11));
  EventSpec<2> down = up;
  down.direction = Direction::decreasing;
  hit = integrate_to_event(osc, State<2>{1.0, 0.0}, 0.0, 10.0, down);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(0.5 * kPi).epsilon(1e-11));
  down.min_time = 2.0;
  hit = integrate_to_event(osc, State<2>{1.0, 0.0}, 0.0, 10.0, down);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(2.5 * kPi).epsilon(1e-11));
  // backwards: the decreasing crossing in physical time, reached from t = 0
  down.min_time = 0.0;
  hit = integrate_to_event(osc, State<2>{1.0, 0.0}, 0.0, -10.0, down);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(-1.5 * kPi).epsilon(1e-11));
  EventSpec<2> never{[](const State<2>& x, double, const State<2>&) { return x[0] - 5.0; }};
  CHECK(!integrate_to_event(osc, State<2>{1.0, 0.0}, 0.0, 10.0, never));
}

TEST_CASE("secular vector field is Hamiltonian") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 12);
  SecularSystem sys(table, 24.394);
  State<4> x{-0.006, -0.804, 652.256, 1.4524};
  State<4> f{};
  sys(x, f, 0.0);
  auto partial = [&](std::size_t i, double h) {
    State<4> a = x, b = x;
    a[i] += h;
    b[i] -= h;
    return (sys.energy(a) - sys.energy(b)) / (2 * h);
  };
  using S = SecularSystem;
  CHECK(f[S::kR] == doctest::Approx(-partial(S::kr, 1e-3)).epsilon(1e-7));
  CHECK(f[S::kr] == doctest::Approx(partial(S::kR, 1e-6)).epsilon(1e-7));
  CHECK(f[S::kG] == doctest::Approx(-partial(S::kg, 1e-5)).epsilon(1e-6));
  CHECK(f[S::kg] == doctest::Approx(partial(S::kG, 1e-5)).epsilon(1e-6));
  CHECK(sys.energy(x) == doctest::Approx(sys.energy_without_R(x[1], x[2], x[3]) + 0.5 * x[0] * x[0]));
}

TEST_CASE("secular flow conserves energy and guards the series domain") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 12);
  SecularSystem sys(table, 24.394);
  const auto traj = integrate(sys, State<4>{-0.006, -0.804, 652.256, 1.4524}, 0.0, 2e4, {1e-12, 1e-12});
  CHECK(traj.relative_energy_drift() < 1e-9);
  State<4> close{0.0, 0.5, 100.0, 1.0};
  State<4> d{};
  CHECK_THROWS_AS(sys(close, d, 0.0), SeriesDomainError);
  CHECK_THROWS_AS(sys.check_domain(State<4>{0.0, 1.5, 600.0, 1.0}), SeriesDomainError);
}

TEST_CASE("E0 flow keeps E0") {
  E0System sys(0.7);
  const auto traj = integrate(sys, State<2>{0.3, 1.0}, 0.0, 50.0, {1e-12, 1e-12});
  CHECK(traj.relative_energy_drift() < 1e-9);
}
