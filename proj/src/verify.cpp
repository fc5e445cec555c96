#include "perihelion/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <random>

#include "perihelion/angles.hpp"
#include "perihelion/brackets.hpp"
#include "perihelion/chaos.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/euler_center.hpp"
#include "perihelion/flow.hpp"
#include "perihelion/orbital_core.hpp"
#include "perihelion/secular.hpp"

namespace perihelion {

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

bool VerifyReport::suite_pass(const std::string& suite) const {
  for (const auto& c : checks)
    if (c.suite == suite && !c.pass) return false;
  return true;
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"suite", c.suite},
                   {"check", c.name},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"pass", c.pass},
                   {"detail", c.detail}});
  }
  return arr;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"brackets", "renormalizability", "parity",
                                              "identities"};
  return names;
}

double q2_closed_form(double G, double g, bool flip) {
  const double s = flip ? -1.0 : 1.0;
  return -(5.0 - 3.0 * G * G) / 8.0 - s * (15.0 / 8.0) * (1.0 - G * G) * std::cos(2.0 * g);
}

namespace {

std::string format_level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void add(VerifyReport& rep, const std::string& suite, const std::string& name, double value,
         double tol, std::string detail = {}) {
  rep.checks.push_back({suite, name, value, tol, std::isfinite(value) && value <= tol,
                        std::move(detail)});
}

void brackets_suite(const VerifyConfig& cfg, VerifyReport& rep) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ur(3.0, 20.0), uG(-0.95, 0.95), ug(0.0, kTwoPi);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.bracket_points; ++i) {
    const double r = ur(rng), G = uG(rng), g = ug(rng);
    worst = std::max(worst, std::abs(ue0_bracket(r, G, g, cfg.nodes)));
  }
  add(rep, "brackets", "{U,E0} max", worst, 1e-6,
      std::to_string(cfg.bracket_points) + " points, r in [3,20]");

  // Two-centre problem: the Euler integral commutes with the Hamiltonian.
  EulerConfig ec{0.37, {1.3, 0.0, 0.0}};
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(-0.8, 0.8);
  double worst_e = 0.0;
  std::size_t done = 0;
  while (done < 200) {
    CartesianState s{{uy(rng), uy(rng), uy(rng)}, {ux(rng), ux(rng), ux(rng)}};
    const double d0 = std::hypot(s.x[0], s.x[1], s.x[2]);
    const double d1 = std::hypot(s.x[0] - ec.xprime[0], s.x[1], s.x[2]);
    if (d0 < 0.3 || d1 < 0.3) continue;
    auto H = [&](const CartesianState& c) { return euler_hamiltonian(c, ec); };
    auto E = [&](const CartesianState& c) { return euler_integral(c, ec); };
    worst_e = std::max(worst_e, std::abs(bracket_cartesian(E, H, s)));
    ++done;
  }
  add(rep, "brackets", "{E,H} two-centre max", worst_e, 1e-6, "200 points");
}

void renormalizability_suite(const VerifyConfig& cfg, VerifyReport& rep) {
  for (double level : {-8.0, -4.0, 0.0, 4.0, 8.0}) {
    const auto r = verify_renormalizability(10.0, level, 50, cfg.nodes);
    add(rep, "renormalizability", "U spread on E0=" + format_level(level), r.max_deviation, 1e-8,
        "r=10, 50 samples");
  }
}


void parity_suite(const VerifyConfig& cfg, VerifyReport& rep) {
  const auto params = mass_params_from_betas(80.0, 80.0);
  const auto table = CoeffTable::build(params, std::max(cfg.nu_max, 9));
  double odd = 0.0, q2 = 0.0, mirror = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double G = -1.0 + 2.0 * i / 49.0;
    for (int j = 0; j < 50; ++j) {
      const double g = kTwoPi * j / 49.0;
      for (int nu = 1; nu <= 9; nu += 2) odd = std::max(odd, std::abs(table.q(nu, G, g)));
      q2 = std::max(q2, std::abs(table.q(2, G, g) - q2_closed_form(G, g, cfg.inject_q2_sign_fault)));
      for (int nu = 2; nu <= table.nu_max(); nu += 2)
        mirror = std::max(mirror, std::abs(table.q(nu, G, g) - table.q(nu, -G, -g)));
    }
  }
  add(rep, "parity", "max |q_nu|, odd nu <= 9", odd, 1e-10, "beta = betabar, 50x50 grid");
  add(rep, "parity", "q_2 vs closed form", q2, 1e-10, "50x50 grid");
  add(rep, "parity", "q_nu(G,g) - q_nu(-G,-g)", mirror, 1e-10, "even nu");
}

void identities_suite(const VerifyConfig& cfg, VerifyReport& rep) {
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_real_distribution<double> uy(0.2, 5.0), ux(0.05, kTwoPi - 0.05);
  double c2 = 0.0;
  for (std::size_t i = 0; i < cfg.identity_samples; ++i) {
    const double y = uy(rng), x = ux(rng);
    const auto [R, r] = c2_to_radial({y, x});
    const double lhs = 0.5 * R * R - 1.0 / r;
    const double rhs = -0.5 / (y * y);
    const double scale = std::max({1.0, 0.5 * R * R, 1.0 / r});
    c2 = std::max(c2, std::abs(lhs - rhs) / scale);
  }
  add(rep, "identities", "R^2/2 - 1/r + 1/(2y^2)", c2, 1e-12,
      std::to_string(cfg.identity_samples) + " samples");

  std::uniform_real_distribution<double> ub(0.5, 100.0), ur(3.0, 20.0), uG(-0.95, 0.95),
      ug(0.0, kTwoPi);
  QuadratureOptions q;
  q.n_nodes = cfg.nodes;
  double hom = 0.0;
  for (std::size_t i = 0; i < cfg.identity_samples; ++i) {
    const double b = ub(rng), rho = ur(rng), G = uG(rng), g = ug(rng);
    const double r = rho * b;
    const double Ub = averaged_potential(b, r, 1.0, 0.0, G, g, q);
    const double U1 = averaged_potential(1.0, rho, 1.0, 0.0, G, g, q) / b;
    hom = std::max(hom, std::abs(Ub - U1) / std::abs(U1));
  }
  add(rep, "identities", "U_b(r) vs U_1(r/b)/b (relative)", hom, 1e-12,
      std::to_string(cfg.identity_samples) + " samples");

  const double C = 24.394;
  const auto params = mass_params_from_betas(80.0, 80.0);
  const auto table = CoeffTable::build(params, cfg.nu_max);
  const State<4> pivot = default_pivot();
  const auto st = from_state(pivot, C);
  const double hs = series_hamiltonian(st, table);
  const double hq = secular_hamiltonian(st, params, q);
  add(rep, "identities", "series vs quadrature H at pivot", std::abs(hs - hq), 1e-10,
      "nu_max " + std::to_string(cfg.nu_max));

  SecularSystem sys(table, C);
  const auto traj = integrate(sys, pivot, 0.0, cfg.drift_time, {cfg.drift_tol, cfg.drift_tol});
  add(rep, "identities", "relative energy drift", traj.relative_energy_drift(), 1e-9,
      "t = " + format_level(cfg.drift_time) + ", tol " + format_level(cfg.drift_tol));
}

}  // namespace

void run_suite(const std::string& suite, const VerifyConfig& cfg, VerifyReport& report) {
  if (suite == "brackets") return brackets_suite(cfg, report);
  if (suite == "renormalizability") return renormalizability_suite(cfg, report);
  if (suite == "parity") return parity_suite(cfg, report);
  if (suite == "identities") return identities_suite(cfg, report);
  throw DomainError("unknown verify suite: " + suite);
}

}  // namespace perihelion
