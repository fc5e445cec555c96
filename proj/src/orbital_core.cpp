#include "perihelion/orbital_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"

namespace perihelion {

double eccentricity(double Lambda, double G) {
  if (!(Lambda > 0.0)) throw DomainError("eccentricity: Lambda must be positive");
  const double ratio = G / Lambda;
  if (std::abs(ratio) > 1.0 + 1e-15) throw DomainError("eccentricity: |G| > Lambda");
  return std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
}

double OrbitalElements::eccentricity() const { return perihelion::eccentricity(Lambda, G); }

void OrbitalElements::validate() const {
  if (!(Lambda > 0.0)) throw DomainError("OrbitalElements: Lambda must be positive");
  if (std::abs(G) > Lambda * (1.0 + 1e-15)) throw DomainError("OrbitalElements: |G| > Lambda");
  if (std::abs(Theta) > std::abs(G) * (1.0 + 1e-15) + 0.0)
    throw DomainError("OrbitalElements: |Theta| > |G|");
}

namespace {

// Safeguarded Newton for f(xi) = xi - e sin xi - target, monotone in xi.
// A Newton iterate that leaves the bracket, or fails to halve the residual,
// is replaced by a bisection step.
double safeguarded_kepler(double e, double target, double lo, double hi, double start,
                          const KeplerOptions& opts) {
  auto f = [&](double xi) { return xi - e * std::sin(xi) - target; };
  const double floor =
      4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(target));
  const double accept = std::max(opts.tolerance, floor);
  double xi = std::clamp(start, lo, hi);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double fx = f(xi);
    if (std::abs(fx) <= opts.tolerance) return xi;
    if (fx > 0.0) hi = xi; else lo = xi;
    const double slope = 1.0 - e * std::cos(xi);
    double next = slope > 0.0 ? xi - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi) || std::abs(fx) > 0.5 * previous) next = 0.5 * (lo + hi);
    previous = std::abs(fx);
    if (next == xi || hi - lo <= floor) return std::abs(fx) <= accept ? xi : next;
    xi = next;
  }
  if (std::abs(f(xi)) <= accept) return xi;
  throw ConvergenceError("solve_kepler: no convergence (e=" + std::to_string(e) +
                         ", ell=" + std::to_string(target) + ")");
}

}  // namespace

double solve_kepler(double e, double ell, const KeplerOptions& opts) {
  if (!(e >= 0.0) || !(e < 1.0))
    throw ConvergenceError("solve_kepler: eccentricity outside [0, 1)");
  if (e == 0.0) return ell;
  // xi - ell = e sin xi, so the root lies within e of ell.
  return safeguarded_kepler(e, ell, ell - e, ell + e, ell + e * std::sin(ell), opts);
}

double solve_kepler(double Lambda, double G, double ell, const KeplerOptions& opts) {
  return solve_kepler(eccentricity(Lambda, G), ell, opts);
}

double solve_radial_kepler(double x, const KeplerOptions& opts) {
  if (!(x > 0.0) || !(x < kTwoPi))
    throw DomainError("solve_radial_kepler: x outside (0, 2 pi)");
  // Cube-root seed near the cusp at 0, symmetric treatment near 2 pi.
  double seed = x;
  if (x < 1.0) seed = std::cbrt(6.0 * x);
  else if (x > kTwoPi - 1.0) seed = kTwoPi - std::cbrt(6.0 * (kTwoPi - x));
  return safeguarded_kepler(1.0, x, std::max(0.0, x - 1.0), std::min(kTwoPi, x + 1.0), seed,
                            opts);
}

EllipseFactors ellipse_factors(const OrbitalElements& el) {
  el.validate();
  EllipseFactors out;
  out.e = el.eccentricity();
  out.xi = solve_kepler(out.e, el.ell);
  const double c = std::cos(out.xi);
  const double s = std::sin(out.xi);
  const double ratio = el.G / el.Lambda;
  out.varrho = 1.0 - out.e * c;
  out.p = (c - out.e) * std::cos(el.g) - ratio * s * std::sin(el.g);
  out.nu = std::atan2(ratio * s, c - out.e);
  return out;
}

std::pair<double, double> c1_to_orbital(const ActionAngle& aa) {
  if (aa.calG == 0.0) throw DomainError("c1_to_orbital: calG = 0 leaves the branch undefined");
  if (!(std::abs(aa.calG) < 1.0)) throw DomainError("c1_to_orbital: |calG| must be < 1");
  const double root = std::sqrt(1.0 - aa.calG * aa.calG);
  const double G = root * std::cos(aa.gamma);
  // The principal atan already follows the level set continuously in gamma:
  // cos g keeps the sign of calG for every gamma.
  const double k = aa.calG > 0.0 ? 0.0 : 1.0;
  const double g = -std::atan(root * std::sin(aa.gamma) / aa.calG) + k * kPi;
  return {G, wrap_positive(g)};
}

std::pair<double, double> c2_to_radial(const RadialPair& rp, double collision_floor) {
  if (rp.y == 0.0) throw DomainError("c2_to_radial: y must be nonzero");
  const double xi = solve_radial_kepler(rp.x);
  const double one_minus_cos = 1.0 - std::cos(xi);
  if (one_minus_cos < collision_floor) throw DomainError("c2_to_radial: collision limit");
  const double R = std::sin(xi) / (rp.y * one_minus_cos);
  const double r = rp.y * rp.y * one_minus_cos;
  return {R, r};
}

}  // namespace perihelion
