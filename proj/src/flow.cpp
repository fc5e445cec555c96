#include "perihelion/flow.hpp"

#include <cmath>
#include <string>

#include "perihelion/angles.hpp"

namespace perihelion {

SecularSystem::SecularSystem(const CoeffTable& table, double C, double guard_factor)
    : table_(table), C_(C), guard_factor_(guard_factor) {}

void SecularSystem::check_domain(const State<4>& x) const {
  const double G = x[kG];
  const double r = x[kr];
  if (!(std::abs(G) <= 1.0)) {
    throw SeriesDomainError("secular flow: |G| > 1 (G = " + std::to_string(G) + ")");
  }
  const double e = std::sqrt(std::max(0.0, 1.0 - G * G));
  const double limit = guard_factor_ * table_.params().beta_upper * (1.0 + e);
  if (!(r >= limit)) {
    throw SeriesDomainError("secular flow: r = " + std::to_string(r) +
                            " below the series trust radius " + std::to_string(limit));
  }
}

void SecularSystem::operator()(const State<4>& x, State<4>& dxdt, double /*t*/) const {
  check_domain(x);
  const double R = x[kR], G = x[kG], r = x[kr], g = x[kg];
  const SeriesValue V = table_.potential(G, g, r);
  const double dc = C_ - G;
  const double r2 = r * r;
  dxdt[kR] = dc * dc / (r2 * r) - V.dr;
  dxdt[kG] = -V.dg;
  dxdt[kr] = R;
  dxdt[kg] = -dc / r2 + V.dG;
}

double SecularSystem::energy(const State<4>& x) const {
  return 0.5 * x[kR] * x[kR] + energy_without_R(x[kG], x[kr], x[kg]);
}

double SecularSystem::energy_without_R(double G, double r, double g) const {
  const double dc = C_ - G;
  return dc * dc / (2.0 * r * r) + table_.potential(G, g, r).value;
}

void E0System::operator()(const State<2>& x, State<2>& dxdt, double /*t*/) const {
  const auto grad = e0_gradient(r_, x[0], x[1]);
  dxdt[0] = -grad.dg;
  dxdt[1] = grad.dG;
}

State<6> EulerSystem::pack(const CartesianState& c) {
  return {c.x[0], c.x[1], c.x[2], c.y[0], c.y[1], c.y[2]};
}

CartesianState EulerSystem::unpack(const State<6>& s) {
  CartesianState c;
  c.x = {s[0], s[1], s[2]};
  c.y = {s[3], s[4], s[5]};
  return c;
}

void EulerSystem::operator()(const State<6>& s, State<6>& dsdt, double /*t*/) const {
  const double r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
  const double inv3 = 1.0 / (r2 * std::sqrt(r2));
  const double d0 = s[0] - cfg_.xprime[0];
  const double d1 = s[1] - cfg_.xprime[1];
  const double d2 = s[2] - cfg_.xprime[2];
  const double q2 = d0 * d0 + d1 * d1 + d2 * d2;
  const double m3 = cfg_.Mprime / (q2 * std::sqrt(q2));
  dsdt[0] = s[3];
  dsdt[1] = s[4];
  dsdt[2] = s[5];
  dsdt[3] = -s[0] * inv3 - d0 * m3;
  dsdt[4] = -s[1] * inv3 - d1 * m3;
  dsdt[5] = -s[2] * inv3 - d2 * m3;
}

double EulerSystem::energy(const State<6>& s) const { return euler_hamiltonian(unpack(s), cfg_); }

double EulerSystem::integral(const State<6>& s) const { return euler_integral(unpack(s), cfg_); }

std::size_t LibrationReport::count_winding_2pi() const {
  std::size_t n = 0;
  for (const auto& o : orbits) n += o.winding >= kTwoPi ? 1 : 0;
  return n;
}

bool LibrationReport::all_pass() const {
  if (orbits.empty()) return false;
  for (const auto& o : orbits) {
    if (o.winding < kTwoPi || !o.stayed_in_neighbourhood || o.left_trust_region) return false;
  }
  return true;
}

LibrationReport libration_experiment(const LibrationConfig& cfg) {
  LibrationReport report;
  report.config = cfg;
  const MassParams params = mass_params_from_betas(cfg.beta, cfg.betabar);
  const CoeffTable table = CoeffTable::build(params, cfg.nu_max);
  const SecularSystem sys(table, 0.0);
  const double beta_up = params.beta_upper;
  const double r0 = cfg.r0_factor * beta_up;
  const double r_stop = cfg.stop_factor * beta_up;
  const double R0 = cfg.escape_fraction * std::sqrt(2.0 / r0);

  const auto n = cfg.n_orbits;
  const auto n_g = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t n_G = (n + n_g - 1) / n_g;

  IntegratorOptions opts;
  opts.rtol = cfg.tol;
  opts.atol = cfg.tol;
  const Rkf78<SecularSystem> integ(sys, opts);

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k % n_g;
    const std::size_t j = k / n_g;
    LibrationOrbit orbit;
    orbit.g0 = cfg.g_center + cfg.box_g * (2.0 * (static_cast<double>(i) + 0.5) / n_g - 1.0);
    orbit.G0 = cfg.G_center + cfg.box_G * (2.0 * (static_cast<double>(j) + 0.5) / n_G - 1.0);
    const State<4> x0{R0, orbit.G0, r0, orbit.g0};

    auto polar = [&](const State<4>& x) {
      return std::atan2(x[SecularSystem::kG] - cfg.G_center,
                        angle_difference(x[SecularSystem::kg], cfg.g_center));
    };
    double angle = polar(x0);
    double accumulated = 0.0;
    bool went_out = false;
    orbit.r_max = r0;
    try {
      integ.run(0.0, x0, cfg.t_max, [&](const StepRecord<4>& rec) {
        // four sub-samples per step keep each angle increment small
        for (int s = 1; s <= 4; ++s) {
          const double ts = rec.t0 + (rec.t1 - rec.t0) * s / 4.0;
          const State<4> xs = s == 4 ? rec.x1 : integ.dense(rec, ts);
          const double a = polar(xs);
          accumulated += angle_difference(a, angle);
          angle = a;
          if (std::abs(xs[SecularSystem::kG] - cfg.G_center) > cfg.nbhd_G ||
              std::abs(angle_difference(xs[SecularSystem::kg], cfg.g_center)) > cfg.nbhd_g) {
            orbit.stayed_in_neighbourhood = false;
          }
        }
        const double r = rec.x1[SecularSystem::kr];
        orbit.r_max = std::max(orbit.r_max, r);
        orbit.t_end = rec.t1;
        if (r > r0) went_out = true;
        return !(went_out && r < r_stop);
      });
    } catch (const SeriesDomainError&) {
      orbit.left_trust_region = true;
    }
    orbit.winding = std::abs(accumulated);
    report.orbits.push_back(orbit);
  }
  return report;
}

}  // namespace perihelion
