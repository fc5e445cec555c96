#pragma once

// Slow, independent reference computations shared by the unit tests.

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// xi - e sin xi = ell by plain bisection on [ell - 1, ell + 1].
inline double kepler_bisect(double e, double ell) {
  double lo = ell - 1.0, hi = ell + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - e * std::sin(mid) < ell) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Inner position for a = 1, Theta = 0 in the frame where the perihelion sits
/// at angle g - pi from the +x axis.
struct Pos {
  double x, y;
};
inline Pos ellipse_position(double G, double g, double ell) {
  const double e = std::sqrt(1.0 - G * G);
  const double xi = kepler_bisect(e, ell);
  const double px = std::cos(xi) - e;  // along the perihelion direction
  const double py = G * std::sin(xi);  // along M x perihelion
  const double w = g - pi;
  return {px * std::cos(w) - py * std::sin(w), px * std::sin(w) + py * std::cos(w)};
}

/// <1/|x' - b x|>_ell with x' = (r, 0), averaged by the uniform trapezoid in
/// the mean anomaly.
inline double averaged_inverse_distance(double b, double r, double G, double g, int n) {
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto p = ellipse_position(G, g, 2.0 * pi * (k + 0.5) / n);
    sum += 1.0 / std::hypot(r - b * p.x, b * p.y);
  }
  return sum / n;
}

/// <|x|^k P_k(cos angle(x, e_x))>_ell by the same trapezoid.
inline double legendre_average(int k, double G, double g, int n) {
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto p = ellipse_position(G, g, 2.0 * pi * (j + 0.5) / n);
    const double rho = std::hypot(p.x, p.y);
    sum += std::pow(rho, k) * std::legendre(static_cast<unsigned>(k), p.x / rho);
  }
  return sum / n;
}

}  // namespace oracle
