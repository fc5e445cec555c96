#pragma once

// Kepler equation, ellipse geometry and the two canonical changes used near
// perihelion librations: the action-angle pair (calG, gamma) of the leading
// part of E0, and the radial pair (y, x) that straightens the outer Kepler
// energy.

#include <utility>

namespace perihelion {

/// Delaunay-like description of the inner Keplerian ellipse (gravity
/// constant 1, semi-major axis a = Lambda^2).
struct OrbitalElements {
  double Lambda = 1.0;
  double G = 1.0;      ///< signed angular momentum, |G| <= Lambda
  double Theta = 0.0;  ///< projection of M on x'; |Theta| <= |G|
  double g = 0.0;      ///< perihelion argument, measured from x' (+pi offset)
  double ell = 0.0;    ///< mean anomaly

  double semi_major_axis() const { return Lambda * Lambda; }
  double eccentricity() const;
  /// Throws DomainError unless Lambda > 0, |G| <= Lambda, |Theta| <= |G|.
  void validate() const;
};

/// Action-angle coordinates of sqrt(1 - G^2) cos g (the large-r part of E0).
struct ActionAngle {
  double calG = 0.5;  ///< |calG| < 1
  double gamma = 0.0;
};

/// Radial pair; (R^2/2 - 1/r) becomes -1/(2 y^2).
struct RadialPair {
  double y = 1.0;
  double x = 3.14159265358979323846;
};

struct KeplerOptions {
  double tolerance = 1e-14;  ///< absolute residual target
  int max_iterations = 64;
};

/// e(Lambda, G) = sqrt(1 - G^2 / Lambda^2).
double eccentricity(double Lambda, double G);

/// Solves xi - e sin(xi) = ell for 0 <= e < 1. The root is the unique one on
/// the real line (no reduction of ell). Newton from ell + e sin(ell), with a
/// bisection fallback whenever an iterate leaves the bracket or stalls.
double solve_kepler(double e, double ell, const KeplerOptions& opts = {});
double solve_kepler(double Lambda, double G, double ell, const KeplerOptions& opts = {});

/// Solves xi' - sin(xi') = x for x in (0, 2 pi) (the e = 1 equation).
double solve_radial_kepler(double x, const KeplerOptions& opts = {});

struct EllipseFactors {
  double e = 0.0;
  double xi = 0.0;      ///< eccentric anomaly
  double varrho = 1.0;  ///< |x| / a = 1 - e cos(xi)
  double p = 0.0;       ///< (cos xi - e) cos g - (G/Lambda) sin xi sin g
  double nu = 0.0;      ///< true anomaly, in (-pi, pi]
};

EllipseFactors ellipse_factors(const OrbitalElements& el);

/// C1: (calG, gamma) -> (G, g). Rejects calG = 0 and |calG| >= 1.
/// g is returned in [0, 2 pi).
std::pair<double, double> c1_to_orbital(const ActionAngle& aa);

/// C2: (y, x) -> (R, r). R carries the sign of sin(xi'), so the map is one to
/// one over x in (0, 2 pi); on (0, pi] it coincides with
/// (1/y) sqrt((1 + cos xi') / (1 - cos xi')).
std::pair<double, double> c2_to_radial(const RadialPair& rp, double collision_floor = 1e-12);

}  // namespace perihelion
