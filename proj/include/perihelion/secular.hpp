#pragma once

// Secular (l-averaged) three-body Hamiltonians: mass parameters, the averaged
// Newtonian potential by quadrature, and its Legendre/Fourier expansion in
// powers of beta / r.

#include <cstddef>
#include <utility>
#include <vector>

#include "json.hpp"

namespace perihelion {

enum class Frame { jacobi, one_centric };

struct MassParams {
  double mu = 1.0;
  double kappa = 1.0;
  double gamma_const = 0.0;
  double beta = 0.0;
  double betabar = 0.0;
  double beta_lower = 0.0;  ///< beta_star (lower bound)
  double beta_upper = 0.0;  ///< beta^star (upper bound)
  Frame frame = Frame::jacobi;
};

MassParams derive_mass_params(double mu, double kappa, Frame frame = Frame::jacobi);

/// Inverts beta(mu, kappa) for kappa at fixed mu (beta is increasing in kappa).
double kappa_for_beta(double mu, double beta, Frame frame = Frame::jacobi);

/// Mass parameters with the requested (beta, betabar): mu = betabar / beta
/// and kappa from kappa_for_beta.
MassParams mass_params_from_betas(double beta, double betabar, Frame frame = Frame::jacobi);

/// One Newtonian potential in the secular Hamiltonian: -weight * U_scale.
struct PotentialTerm {
  double weight = 0.0;
  double scale = 0.0;
};

/// Jacobi: {betabar/(beta+betabar), beta}, {beta/(beta+betabar), -betabar}.
/// One-centric: {betabar/(beta+betabar), beta+betabar}, {beta/(beta+betabar), 0}.
std::vector<PotentialTerm> potential_terms(const MassParams& params);

/// Reduced planar secular phase-space point plus its constants.
struct PlanarSecularState {
  double R = 0.0;
  double G = 0.0;
  double r = 1.0;
  double g = 0.0;
  double C = 0.0;
  double Lambda = 1.0;
};

/// Quadrature nodes of the inner ellipse, uniform in the eccentric anomaly
/// xi_i = 2 pi i / n. With dl = (1 - e cos xi) dxi the uniform-in-l average
/// becomes mean_i W_i f(xi_i), W_i = 1 - e cos xi_i, and the trapezoid stays
/// spectrally accurate up to e = 1.
class EllipseNodes {
 public:
  EllipseNodes(double Lambda, double G, std::size_t n);

  double Lambda() const { return Lambda_; }
  double G() const { return G_; }
  double eccentricity() const { return e_; }
  std::size_t size() const { return X_.size(); }
  const std::vector<double>& X() const { return X_; }  ///< cos xi - e
  const std::vector<double>& Y() const { return Y_; }  ///< (G/Lambda) sin xi
  const std::vector<double>& W() const { return W_; }  ///< 1 - e cos xi

 private:
  double Lambda_;
  double G_;
  double e_;
  std::vector<double> X_, Y_, W_;
};

struct QuadratureOptions {
  std::size_t n_nodes = 1024;          ///< power of two
  double collision_fraction = 1e-3;    ///< refuse when min distance < fraction * r
};

/// U_b(r, G, g) = (1/2pi) int dl / |x' - b x(l)|, a = Lambda^2,
/// |x' - b x|^2 = r^2 + 2 b r a s p + b^2 a^2 varrho^2, s = sqrt(1 - Theta^2/G^2)
/// (s = 1 when Theta = 0). Throws DomainError near collisions.
double averaged_potential(double beta_arg, double r, double Lambda, double Theta, double G,
                          double g, const QuadratureOptions& opts = {});
double averaged_potential(const EllipseNodes& nodes, double beta_arg, double r, double Theta,
                          double g, double collision_fraction = 1e-3);

/// Hat-H of the chosen frame by direct quadrature of every potential.
double secular_hamiltonian(const PlanarSecularState& s, const MassParams& params,
                           const QuadratureOptions& opts = {});

/// L_k(G, g) = < rho^k P_k(cos theta) >_l for k = 0..kmax, by the uniform
/// trapezoid in the mean anomaly (Kepler solve per node). Used to cross-check
/// the coefficient table; limited to e < 1.
std::vector<double> legendre_averages_mean_anomaly(double G, double g, int kmax,
                                                   std::size_t n_nodes = 1024);

struct QValue {
  double value = 0.0;
  double dG = 0.0;
  double dg = 0.0;
};

/// Value and gradient of V(G, g, r) = -1/r + sum_nu q_nu (beta/r)^nu / r.
struct SeriesValue {
  double value = 0.0;
  double dG = 0.0;
  double dg = 0.0;
  double dr = 0.0;
};

/// Coefficients q_nu(G, g) = sum_m qt_{nu,m}(G) cos(m g) of
/// hat-H = R^2/2 + (C-G)^2/(2 r^2) - 1/r + (1/r) sum_nu q_nu (beta/r)^nu.
/// Each qt_{nu,m} is e^(m mod 2) times a polynomial in e^2 = 1 - G^2, stored
/// as a Chebyshev series, so values and G-derivatives are exact to rounding.
/// Immutable after construction.
class CoeffTable {
 public:
  static CoeffTable build(const MassParams& params, int nu_max);

  int nu_max() const { return nu_max_; }
  double reference_beta() const { return beta_; }
  const MassParams& params() const { return params_; }

  double q(int nu, double G, double g) const;
  QValue q_with_derivatives(int nu, double G, double g) const;
  /// Coefficient of cos(m g) in q_nu.
  double tilde_q(int nu, int m, double G) const;
  /// L_k(G, g) for a single potential of unit scale.
  double legendre_average(int k, double G, double g) const;

  SeriesValue potential(double G, double g, double r) const;

  /// {"nu_max", "beta", "coefficients": [{nu, m, p, G:[...], values:[...]}]}
  nlohmann::json to_json(const std::vector<double>& G_grid) const;

 private:
  struct Term {
    int m = 0;
    std::vector<double> cheb;   // F(u) in t = 2u - 1
    std::vector<double> dcheb;  // dF/dt
  };
  struct Order {
    std::vector<Term> q_terms;         // weighted, sign included
    std::vector<Term> legendre_terms;  // unweighted L_k components
  };

  static double eval_term(const Term& t, double u, double e, double* dA_du);
  QValue eval_terms(const std::vector<Term>& terms, double G, double g) const;

  MassParams params_;
  double beta_ = 0.0;
  int nu_max_ = 0;
  std::vector<Order> orders_;  // index nu, 0..nu_max
};

/// Hat-H from the truncated series.
double series_hamiltonian(const PlanarSecularState& s, const CoeffTable& table);

/// Smallest nu_max >= start whose series Hamiltonian at `probe` changes by no
/// more than rel_tol (relative) when two more orders are added.
int stabilized_nu_max(const MassParams& params, const PlanarSecularState& probe, int start = 10,
                      double rel_tol = 1e-9, int cap = 40);

/// Lowest-order slow Hamiltonian at r = r0:
/// (-2CG + G^2)/(2 r0^2) - beta^2 (5 - 3G^2)/(8 r0^3) - 15 beta^2 (1-G^2) cos 2g / (8 r0^3).
double h_slow0(double G, double g, double C, double beta, double r0);

/// Minimum of the fast Hamiltonian: (R0, r0) = (0, C^2). Rejects C = 0.
std::pair<double, double> fast_equilibrium(double C);

}  // namespace perihelion
