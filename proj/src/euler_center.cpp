#include "perihelion/euler_center.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/secular.hpp"

namespace perihelion {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double checked_distance(const Vec3& a, const Vec3& b, const char* what) {
  const double d = norm(sub(a, b));
  if (!(d > 0.0)) throw DomainError(std::string("collision with ") + what);
  return d;
}

struct ElementTerms {
  double J0, s_p, dist;
};

ElementTerms element_terms(const OrbitalElements& el, double r) {
  const auto f = ellipse_factors(el);
  const double a = el.semi_major_axis();
  const double s = el.Theta == 0.0 ? 1.0 : std::sqrt(1.0 - el.Theta * el.Theta / (el.G * el.G));
  const double d2 = r * r + 2.0 * r * a * s * f.p + a * a * f.varrho * f.varrho;
  if (!(d2 > 0.0)) throw DomainError("elements form: collision with the second centre");
  return {-1.0 / (2.0 * el.Lambda * el.Lambda), a * s * f.p, std::sqrt(d2)};
}

}  // namespace

Vec3 angular_momentum(const CartesianState& s) { return cross(s.x, s.y); }

Vec3 eccentricity_vector(const CartesianState& s) {
  const Vec3 M = angular_momentum(s);
  const Vec3 yM = cross(s.y, M);
  const double rx = checked_distance(s.x, {0.0, 0.0, 0.0}, "the centre at the origin");
  return {yM[0] - s.x[0] / rx, yM[1] - s.x[1] / rx, yM[2] - s.x[2] / rx};
}

double euler_hamiltonian(const CartesianState& s, const EulerConfig& cfg) {
  const double rx = checked_distance(s.x, {0.0, 0.0, 0.0}, "the centre at the origin");
  double J = 0.5 * dot(s.y, s.y) - 1.0 / rx;
  if (cfg.Mprime != 0.0) J -= cfg.Mprime / checked_distance(cfg.xprime, s.x, "the second centre");
  return J;
}

double euler_integral(const CartesianState& s, const EulerConfig& cfg) {
  const Vec3 M = angular_momentum(s);
  const Vec3 L = eccentricity_vector(s);
  double E = dot(M, M) - dot(cfg.xprime, L);
  if (cfg.Mprime != 0.0) {
    const Vec3 d = sub(cfg.xprime, s.x);
    E += cfg.Mprime * dot(d, cfg.xprime) / checked_distance(cfg.xprime, s.x, "the second centre");
  }
  return E;
}

double euler_integral_symmetric(const CartesianState& s, const EulerConfig& cfg) {
  const Vec3 half{0.5 * cfg.xprime[0], 0.5 * cfg.xprime[1], 0.5 * cfg.xprime[2]};
  const Vec3 shifted = sub(s.x, half);
  const Vec3 m = cross(shifted, s.y);
  const double xy = dot(cfg.xprime, s.y);
  const double rx = checked_distance(s.x, {0.0, 0.0, 0.0}, "the centre at the origin");
  double pot = 1.0 / rx;
  if (cfg.Mprime != 0.0) pot -= cfg.Mprime / checked_distance(cfg.xprime, s.x, "the second centre");
  return dot(m, m) + 0.25 * xy * xy + dot(cfg.xprime, shifted) * pot;
}

double euler_hamiltonian_elements(const OrbitalElements& el, double r, double Mprime) {
  const auto t = element_terms(el, r);
  return t.J0 - Mprime / t.dist;
}

double euler_integral_elements(const OrbitalElements& el, double r, double Mprime) {
  const auto t = element_terms(el, r);
  const double s = el.Theta == 0.0 ? 1.0 : std::sqrt(1.0 - el.Theta * el.Theta / (el.G * el.G));
  const double E0 = el.G * el.G + r * s * el.eccentricity() * std::cos(el.g);
  return E0 + Mprime * r * (r + t.s_p) / t.dist;
}

CartesianState elements_to_cartesian(const OrbitalElements& el) {
  el.validate();
  if (el.Theta != 0.0) throw DomainError("elements_to_cartesian: planar case only (Theta = 0)");
  const auto f = ellipse_factors(el);
  const double a = el.semi_major_axis();
  const double n = 1.0 / (a * std::sqrt(a));
  const double ratio = el.G / el.Lambda;
  // perihelion at angle g - pi from x' = r e_x; Q = k x P
  const double Px = -std::cos(el.g), Py = -std::sin(el.g);
  const double Qx = -Py, Qy = Px;
  const double c = std::cos(f.xi), s = std::sin(f.xi);
  const double X = a * (c - f.e), Y = a * ratio * s;
  const double vs = a * n / f.varrho;
  CartesianState out;
  out.x = {X * Px + Y * Qx, X * Py + Y * Qy, 0.0};
  const double U = -vs * s, V = vs * ratio * c;
  out.y = {U * Px + V * Qx, U * Py + V * Qy, 0.0};
  return out;
}

double e0_planar(double r, double G, double g, double Lambda) {
  return G * G + r * eccentricity(Lambda, G) * std::cos(g);
}

E0Gradient e0_gradient(double r, double G, double g) {
  const double s = std::sqrt(std::max(0.0, 1.0 - G * G));
  return {2.0 * G - r * G * std::cos(g) / s, -r * s * std::sin(g)};
}

const char* to_string(EquilibriumType t) {
  switch (t) {
    case EquilibriumType::min: return "min";
    case EquilibriumType::saddle: return "saddle";
    case EquilibriumType::max: return "max";
  }
  return "unknown";
}

namespace {

// Newton on grad E0 with the analytic Hessian; steps halved until |grad|
// decreases. Starts at the closed-form location, so it only polishes rounding.
void refine_equilibrium(double r, Equilibrium& eq) {
  for (int it = 0; it < 20; ++it) {
    const auto grad = e0_gradient(r, eq.G, eq.g);
    const double gnorm = std::hypot(grad.dG, grad.dg);
    if (gnorm < 1e-15) break;
    const double s2 = 1.0 - eq.G * eq.G;
    const double s = std::sqrt(s2);
    const double cg = std::cos(eq.g), sg = std::sin(eq.g);
    const double hGG = 2.0 - r * cg / (s * s2);
    const double hGg = r * eq.G * sg / s;
    const double hgg = -r * s * cg;
    const double det = hGG * hgg - hGg * hGg;
    if (det == 0.0) break;
    const double dG = -(hgg * grad.dG - hGg * grad.dg) / det;
    const double dg = -(-hGg * grad.dG + hGG * grad.dg) / det;
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30 && !improved; ++k, lambda *= 0.5) {
      const auto trial = e0_gradient(r, eq.G + lambda * dG, eq.g + lambda * dg);
      if (std::hypot(trial.dG, trial.dg) < gnorm) {
        eq.G += lambda * dG;
        eq.g += lambda * dg;
        improved = true;
      }
    }
    if (!improved) break;
  }
  eq.energy = e0_planar(r, eq.G, eq.g);
}

}  // namespace

PortraitClassification classify_portrait(double r) {
  if (!(r > 0.0)) throw DomainError("classify_portrait: r must be > 0");
  if (r == 2.0) throw DomainError("classify_portrait: r = 2 is the bifurcation value");
  PortraitClassification pc;
  pc.r = r;
  pc.equilibria.push_back({kPi, 0.0, EquilibriumType::min, -r});
  if (r < 2.0) {
    pc.equilibria.push_back({0.0, 0.0, EquilibriumType::saddle, r});
    const double Gp = std::sqrt(1.0 - r * r / 4.0);
    pc.equilibria.push_back({0.0, Gp, EquilibriumType::max, 1.0 + r * r / 4.0});
    pc.equilibria.push_back({0.0, -Gp, EquilibriumType::max, 1.0 + r * r / 4.0});
    pc.admissible_energy = {-r, 1.0 + r * r / 4.0};
    pc.has_saddle = true;
  } else {
    pc.equilibria.push_back({0.0, 0.0, EquilibriumType::max, r});
    pc.admissible_energy = {-r, r};
  }
  for (auto& eq : pc.equilibria) refine_equilibrium(r, eq);
  pc.rotational_band = r < 1.0;
  pc.vertical_branch_global = r < 1.0;
  return pc;
}

std::optional<double> s1_vertical_branch(double r, double g) {
  const double c = r * std::cos(g);
  const double arg = 1.0 - c * c;
  if (arg < 0.0) return std::nullopt;
  return std::sqrt(arg);
}

double SeparatrixOrbit::sigma() const { return std::sqrt(r * (2.0 - r)); }

std::pair<double, double> separatrix_orbit(const SeparatrixOrbit& so, double t) {
  if (!(so.r > 0.0 && so.r < 2.0)) throw DomainError("separatrix_orbit: needs 0 < r < 2");
  if (so.sign != 1 && so.sign != -1) throw DomainError("separatrix_orbit: sign must be +-1");
  const double sigma = so.sigma();
  const double tau = t - so.t0;
  const double ch = std::cosh(sigma * tau);
  const double ch2 = ch * ch;
  const double G = so.sign * sigma / ch;
  double arg = (1.0 - so.alpha2() / ch2) / std::sqrt(1.0 - sigma * sigma / ch2);
  if (std::abs(arg) > 1.0 + 1e-12) {
    throw DomainError("separatrix_orbit: arccos argument " + std::to_string(arg) +
                      " outside [-1, 1]");
  }
  arg = std::clamp(arg, -1.0, 1.0);
  const double branch = tau > 0.0 ? 1.0 : (tau < 0.0 ? -1.0 : 0.0);
  double g = std::acos(arg);
  if (branch != 0.0) g *= -so.sign * branch;
  return {G, wrap_positive(g)};
}

std::vector<std::pair<double, double>> e0_level_points(double r, double level,
                                                       std::size_t n_samples) {
  if (n_samples == 0) return {};
  // With s = sqrt(1 - G^2): s^2 - r cos(g) s + (level - 1) = 0, s in [0, 1].
  constexpr std::size_t kScan = 8192;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < kScan; ++i) {
    const double g = -kPi + kTwoPi * (static_cast<double>(i) + 0.5) / kScan;
    const double b = r * std::cos(g);
    const double disc = b * b - 4.0 * (level - 1.0);
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double s : {0.5 * (b - sq), 0.5 * (b + sq)}) {
      if (s < 0.0 || s > 1.0) continue;
      const double G = std::sqrt(1.0 - s * s);
      pts.emplace_back(g, G);
      if (G > 0.0) pts.emplace_back(g, -G);
      if (sq == 0.0) break;
    }
  }
  if (pts.empty()) {
    throw DomainError("e0_level_points: level " + std::to_string(level) +
                      " is empty at r = " + std::to_string(r));
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const std::size_t idx = (k * pts.size()) / n_samples;
    out.push_back({wrap_positive(pts[idx].first), pts[idx].second});
  }
  return out;
}

RenormalizabilityReport verify_renormalizability(double r, double level, std::size_t n_samples,
                                                 std::size_t n_nodes) {
  if (!(r > 0.0)) throw DomainError("verify_renormalizability: r must be > 0");
  if (r < 2.0 && std::abs(level - r) < 1e-2) {
    throw DomainError("verify_renormalizability: level lies on the singular curve S0");
  }
  const auto pts = e0_level_points(r, level, n_samples);
  std::vector<double> U;
  U.reserve(pts.size());
  QuadratureOptions opts;
  opts.n_nodes = n_nodes;
  for (const auto& [g, G] : pts) U.push_back(averaged_potential(1.0, r, 1.0, 0.0, G, g, opts));
  RenormalizabilityReport rep;
  rep.samples = U.size();
  double sum = 0.0;
  for (double u : U) sum += u;
  rep.mean_U = sum / static_cast<double>(U.size());
  for (double u : U) {
    rep.max_deviation = std::max(rep.max_deviation, std::abs(u - rep.mean_U) / std::abs(rep.mean_U));
  }
  return rep;
}

}  // namespace perihelion
