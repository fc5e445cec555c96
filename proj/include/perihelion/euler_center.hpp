#pragma once

// Two-centre (Euler) problem with the centres at 0 and x': energy J, Euler
// integral E, the planar model integral E0 and its phase portrait.

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "perihelion/orbital_core.hpp"

namespace perihelion {

using Vec3 = std::array<double, 3>;

struct EulerConfig {
  double Mprime = 0.0;  ///< mass of the centre at xprime
  Vec3 xprime{0.0, 0.0, 0.0};
};

struct CartesianState {
  Vec3 y{0.0, 0.0, 0.0};  ///< momentum
  Vec3 x{1.0, 0.0, 0.0};  ///< position
};

Vec3 angular_momentum(const CartesianState& s);
/// L = y x M - x / |x| (length e, towards perihelion).
Vec3 eccentricity_vector(const CartesianState& s);

/// J = |y|^2/2 - 1/|x| - M'/|x' - x|. Throws DomainError at collisions.
double euler_hamiltonian(const CartesianState& s, const EulerConfig& cfg);

/// E = |M|^2 - x'.L + M' (x' - x).x' / |x' - x|.
double euler_integral(const CartesianState& s, const EulerConfig& cfg);

/// The symmetric-centre form of the integral rewritten for centres at 0, x':
/// |(x - x'/2) x y|^2 + (x'.y)^2/4 + x'.(x - x'/2) (1/|x| - M'/|x' - x|).
/// Equals euler_integral + |x'|^2 J / 2.
double euler_integral_symmetric(const CartesianState& s, const EulerConfig& cfg);

/// Elements forms with |x'| = r; Theta enters through sqrt(1 - Theta^2/G^2).
double euler_hamiltonian_elements(const OrbitalElements& el, double r, double Mprime);
double euler_integral_elements(const OrbitalElements& el, double r, double Mprime);

/// Planar Cartesian state of the ellipse (Theta = 0) with x' = r e_x and the
/// perihelion direction at angle g - pi from x'.
CartesianState elements_to_cartesian(const OrbitalElements& el);
inline Vec3 planar_xprime(double r) { return {r, 0.0, 0.0}; }

/// E0(r, G, g) = G^2 + r sqrt(1 - G^2/Lambda^2) cos g.
double e0_planar(double r, double G, double g, double Lambda = 1.0);

struct E0Gradient {
  double dG = 0.0;
  double dg = 0.0;
};
/// Lambda = 1; singular at |G| = 1.
E0Gradient e0_gradient(double r, double G, double g);

enum class EquilibriumType { min, saddle, max };
const char* to_string(EquilibriumType t);

struct Equilibrium {
  double g = 0.0;
  double G = 0.0;
  EquilibriumType type = EquilibriumType::min;
  double energy = 0.0;
};

struct PortraitClassification {
  double r = 0.0;
  std::vector<Equilibrium> equilibria;
  std::pair<double, double> admissible_energy{0.0, 0.0};
  bool has_saddle = false;              ///< S0 exists (0 < r < 2)
  bool rotational_band = false;         ///< rotations between S0 and S1 (0 < r < 1)
  bool vertical_branch_global = false;  ///< S1 vertical branch defined for every g (r < 1)
};

/// Equilibria of E0 (Lambda = 1, Theta = 0) refined by Newton on grad E0.
/// Rejects r <= 0 and r = 2.
PortraitClassification classify_portrait(double r);

/// S1 vertical branch G = +-sqrt(1 - r^2 cos^2 g); nullopt where undefined.
std::optional<double> s1_vertical_branch(double r, double g);

struct SeparatrixOrbit {
  double r = 0.5;
  double t0 = 0.0;
  int sign = 1;  ///< +1: G > 0 branch, -1: G < 0 branch
  double sigma() const;
  double alpha2() const { return 2.0 - r; }
};

/// Closed-form motion on S0(r): G = sign sigma / cosh(sigma (t - t0)),
/// g = -sign sgn(t - t0) arccos(...), g in [0, 2 pi).
std::pair<double, double> separatrix_orbit(const SeparatrixOrbit& so, double t);

/// Points (g, G) on the E0 = level curve at radius r, spread over the curve.
/// Throws DomainError if the level set is empty.
std::vector<std::pair<double, double>> e0_level_points(double r, double level,
                                                       std::size_t n_samples);

struct RenormalizabilityReport {
  double max_deviation = 0.0;  ///< max |U - mean U| / |mean U|
  double mean_U = 0.0;
  std::size_t samples = 0;
};

/// Evaluates U (unit scale) on n_samples points of one E0 level set.
RenormalizabilityReport verify_renormalizability(double r, double level, std::size_t n_samples,
                                                 std::size_t n_nodes = 4096);

}  // namespace perihelion
