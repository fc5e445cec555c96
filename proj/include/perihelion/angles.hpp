#pragma once

#include <cmath>
#include <numbers>

namespace perihelion {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, period).
inline double wrap_positive(double angle, double period = kTwoPi) {
  double w = std::fmod(angle, period);
  if (w < 0.0) w += period;
  if (w >= period) w -= period;  // fmod of -tiny can land exactly on period
  return w;
}

/// Reduces an angle into [-period/2, period/2).
inline double wrap_centered(double angle, double period = kTwoPi) {
  return wrap_positive(angle + 0.5 * period, period) - 0.5 * period;
}

/// Signed distance between two angles modulo `period`.
inline double angle_difference(double a, double b, double period = kTwoPi) {
  return wrap_centered(a - b, period);
}

}  // namespace perihelion
