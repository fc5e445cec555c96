#include "perihelion/secular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/kernels/quadrature_kernels.hpp"
#include "perihelion/orbital_core.hpp"

namespace perihelion {

namespace {

double mass_denominator(double mu, double kappa, Frame frame) {
  return frame == Frame::jacobi ? 1.0 + mu + kappa : 1.0 + kappa;
}

double beta_of(double mu, double kappa, Frame frame) {
  const double s = 1.0 + mu;
  return kappa * kappa * s * s / (mu * mu * mass_denominator(mu, kappa, frame));
}

// Clenshaw sum of sum_k c_k T_k(t).
double chebyshev_eval(const std::vector<double>& c, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + (c.empty() ? 0.0 : c[0]);
}

std::vector<double> chebyshev_derivative(const std::vector<double>& c) {
  const std::size_t n = c.size();
  if (n < 2) return {0.0};
  std::vector<double> d(n - 1, 0.0);
  // c'_{k-1} = c'_{k+1} + 2 k c_k, with the k = 0 term halved
  for (std::size_t k = n - 1; k >= 1; --k) {
    const double next = (k + 1 < n - 1) ? d[k + 1] : 0.0;
    d[k - 1] = next + 2.0 * static_cast<double>(k) * c[k];
  }
  d[0] *= 0.5;
  return d;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void check_G(double G) {
  if (!(std::abs(G) <= 1.0)) {
    throw DomainError("coefficient table: |G| must be <= Lambda = 1, got " + std::to_string(G));
  }
}

}  // namespace

MassParams derive_mass_params(double mu, double kappa, Frame frame) {
  if (!(mu > 0.0) || !(kappa > 0.0) || !std::isfinite(mu) || !std::isfinite(kappa)) {
    throw DomainError("mass parameters require mu > 0 and kappa > 0");
  }
  MassParams p;
  p.mu = mu;
  p.kappa = kappa;
  p.frame = frame;
  const double s = 1.0 + mu;
  const double den = mass_denominator(mu, kappa, frame);
  p.gamma_const = kappa * kappa * kappa * s * s * s * s / (mu * mu * mu * den);
  p.beta = beta_of(mu, kappa, frame);
  p.betabar = mu * p.beta;
  if (frame == Frame::jacobi) {
    p.beta_lower = p.beta * p.betabar / (p.beta + p.betabar);
    p.beta_upper = std::max(p.beta, p.betabar);
  } else {
    p.beta_lower = p.betabar;
    p.beta_upper = p.beta + p.betabar;
  }
  return p;
}

double kappa_for_beta(double mu, double beta, Frame frame) {
  if (!(mu > 0.0) || !(beta > 0.0)) throw DomainError("kappa_for_beta: mu and beta must be > 0");
  double hi = 1.0;
  while (beta_of(mu, hi, frame) < beta) {
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceError("kappa_for_beta: no bracket");
  }
  auto f = [&](double k) { return beta_of(mu, k, frame) - beta; };
  std::uintmax_t iters = 200;
  const auto [lo_k, hi_k] = boost::math::tools::toms748_solve(
      f, 0.0, hi, f(0.0), f(hi), boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (lo_k + hi_k);
}

MassParams mass_params_from_betas(double beta, double betabar, Frame frame) {
  if (!(beta > 0.0) || !(betabar > 0.0)) {
    throw DomainError("mass_params_from_betas: beta and betabar must be > 0");
  }
  const double mu = betabar / beta;
  MassParams p = derive_mass_params(mu, kappa_for_beta(mu, beta, frame), frame);
  // keep the requested values exactly rather than the round trip
  p.beta = beta;
  p.betabar = betabar;
  if (frame == Frame::jacobi) {
    p.beta_lower = beta * betabar / (beta + betabar);
    p.beta_upper = std::max(beta, betabar);
  } else {
    p.beta_lower = betabar;
    p.beta_upper = beta + betabar;
  }
  return p;
}

std::vector<PotentialTerm> potential_terms(const MassParams& p) {
  const double total = p.beta + p.betabar;
  const double w1 = p.betabar / total;
  const double w2 = p.beta / total;
  if (p.frame == Frame::jacobi) return {{w1, p.beta}, {w2, -p.betabar}};
  return {{w1, p.beta + p.betabar}, {w2, 0.0}};
}

EllipseNodes::EllipseNodes(double Lambda, double G, std::size_t n)
    : Lambda_(Lambda), G_(G), e_(perihelion::eccentricity(Lambda, G)), X_(n), Y_(n), W_(n) {
  if (n == 0) throw DomainError("EllipseNodes: need at least one node");
  const double ratio = G / Lambda;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    const double c = std::cos(xi);
    const double s = std::sin(xi);
    X_[i] = c - e_;
    Y_[i] = ratio * s;
    W_[i] = 1.0 - e_ * c;
  }
}

double averaged_potential(const EllipseNodes& nodes, double b, double r, double Theta, double g,
                          double collision_fraction) {
  if (!(r > 0.0)) throw DomainError("averaged_potential: r must be > 0");
  if (b == 0.0) return 1.0 / r;
  const double Lambda = nodes.Lambda();
  const double a = Lambda * Lambda;
  double s = 1.0;
  if (Theta != 0.0) {
    if (std::abs(Theta) > std::abs(nodes.G())) {
      throw DomainError("averaged_potential: |Theta| must not exceed |G|");
    }
    s = std::sqrt(1.0 - (Theta * Theta) / (nodes.G() * nodes.G()));
  }
  // d = r^2 + 2 b r a s (X cos g - Y sin g) + b^2 a^2 (X^2 + Y^2)
  const double f = 2.0 * b * r * a * s;
  const kernels::DistanceCoefficients coeffs{r * r, f * std::cos(g), -f * std::sin(g),
                                             b * b * a * a};
  const auto res =
      kernels::active_kernels().inverse_distance_mean(nodes.X(), nodes.Y(), nodes.W(), coeffs);
  const double floor = collision_fraction * r;
  if (!(res.min_denominator > floor * floor)) {
    throw DomainError("averaged_potential: orbit passes within " +
                      std::to_string(std::sqrt(std::max(res.min_denominator, 0.0))) +
                      " of the outer body (r = " + std::to_string(r) + ")");
  }
  return res.mean;
}

double averaged_potential(double b, double r, double Lambda, double Theta, double G, double g,
                          const QuadratureOptions& opts) {
  const EllipseNodes nodes(Lambda, G, opts.n_nodes);
  return averaged_potential(nodes, b, r, Theta, g, opts.collision_fraction);
}

double secular_hamiltonian(const PlanarSecularState& s, const MassParams& params,
                           const QuadratureOptions& opts) {
  if (!(s.r > 0.0)) throw DomainError("secular_hamiltonian: r must be > 0");
  const EllipseNodes nodes(s.Lambda, s.G, opts.n_nodes);
  const double dc = s.C - s.G;
  double h = 0.5 * s.R * s.R + dc * dc / (2.0 * s.r * s.r);
  for (const auto& term : potential_terms(params)) {
    h -= term.weight *
         averaged_potential(nodes, term.scale, s.r, 0.0, s.g, opts.collision_fraction);
  }
  return h;
}

std::vector<double> legendre_averages_mean_anomaly(double G, double g, int kmax,
                                                   std::size_t n_nodes) {
  if (kmax < 0) throw DomainError("legendre_averages_mean_anomaly: kmax < 0");
  const double e = eccentricity(1.0, G);
  if (!(e < 1.0)) throw DomainError("legendre_averages_mean_anomaly: needs e < 1");
  std::vector<double> rho(n_nodes), c(n_nodes), w(n_nodes, 1.0);
  const double cg = std::cos(g), sg = std::sin(g);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double ell = kTwoPi * static_cast<double>(i) / static_cast<double>(n_nodes);
    const double xi = solve_kepler(e, ell);
    const double X = std::cos(xi) - e;
    const double Y = G * std::sin(xi);
    rho[i] = 1.0 - e * std::cos(xi);
    c[i] = -(X * cg - Y * sg) / rho[i];
  }
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
  kernels::active_kernels().legendre_moments(rho, c, w, out);
  return out;
}

CoeffTable CoeffTable::build(const MassParams& params, int nu_max) {
  if (nu_max < 1) throw DomainError("CoeffTable: nu_max must be >= 1");
  CoeffTable table;
  table.params_ = params;
  table.beta_ = params.beta;
  table.nu_max_ = nu_max;
  if (!(table.beta_ > 0.0)) throw DomainError("CoeffTable: beta must be > 0");

  const auto kcount = static_cast<std::size_t>(nu_max) + 1;
  // Integrand of L_k in xi is a trig polynomial of degree k + 1, and L_k is a
  // trig polynomial of degree k in g; both grids resolve them exactly.
  const std::size_t n_xi = std::max<std::size_t>(64, next_pow2(2 * kcount + 4));
  const std::size_t n_g = 4 * kcount;
  const std::size_t n_u = static_cast<std::size_t>(nu_max) / 2 + 3;

  // moments[j][gi][k]
  std::vector<std::vector<std::vector<double>>> moments(
      n_u, std::vector<std::vector<double>>(n_g, std::vector<double>(kcount)));
  std::vector<double> u_nodes(n_u), t_nodes(n_u);
  const auto& kern = kernels::active_kernels();
  std::vector<double> cos_theta(n_xi);
  for (std::size_t j = 0; j < n_u; ++j) {
    const double t = std::cos(kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_u));
    t_nodes[j] = t;
    u_nodes[j] = 0.5 * (t + 1.0);
    const double G = std::sqrt(1.0 - u_nodes[j]);
    const EllipseNodes nodes(1.0, G, n_xi);
    const auto& X = nodes.X();
    const auto& Y = nodes.Y();
    const auto& rho = nodes.W();
    for (std::size_t gi = 0; gi < n_g; ++gi) {
      const double g = kTwoPi * static_cast<double>(gi) / static_cast<double>(n_g);
      const double cg = std::cos(g), sg = std::sin(g);
      for (std::size_t i = 0; i < n_xi; ++i) cos_theta[i] = -(X[i] * cg - Y[i] * sg) / rho[i];
      // dl = rho dxi, so the node weight is rho itself
      kern.legendre_moments(rho, cos_theta, rho, moments[j][gi]);
    }
  }

  const auto terms = potential_terms(params);
  table.orders_.resize(kcount);
  for (std::size_t k = 1; k < kcount; ++k) {
    double weight = 0.0;
    for (const auto& term : terms) {
      weight -= term.weight * std::pow(term.scale / table.beta_, static_cast<double>(k));
    }
    for (std::size_t m = k % 2; m <= k; m += 2) {
      std::vector<double> F(n_u);
      for (std::size_t j = 0; j < n_u; ++j) {
        double acc = 0.0;
        for (std::size_t gi = 0; gi < n_g; ++gi) {
          const double g = kTwoPi * static_cast<double>(gi) / static_cast<double>(n_g);
          acc += moments[j][gi][k] * std::cos(static_cast<double>(m) * g);
        }
        acc *= (m == 0 ? 1.0 : 2.0) / static_cast<double>(n_g);
        F[j] = (m % 2 == 1) ? acc / std::sqrt(u_nodes[j]) : acc;
      }
      Term lt;
      lt.m = static_cast<int>(m);
      lt.cheb.assign(n_u, 0.0);
      for (std::size_t c = 0; c < n_u; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n_u; ++j) {
          acc += F[j] * std::cos(kPi * static_cast<double>(c) * (static_cast<double>(j) + 0.5) /
                                 static_cast<double>(n_u));
        }
        lt.cheb[c] = acc * (c == 0 ? 1.0 : 2.0) / static_cast<double>(n_u);
      }
      lt.dcheb = chebyshev_derivative(lt.cheb);
      Term qt = lt;
      for (auto& v : qt.cheb) v *= weight;
      for (auto& v : qt.dcheb) v *= weight;
      table.orders_[k].legendre_terms.push_back(std::move(lt));
      table.orders_[k].q_terms.push_back(std::move(qt));
    }
  }
  return table;
}

double CoeffTable::eval_term(const Term& t, double u, double e, double* dA_du) {
  const double x = 2.0 * u - 1.0;
  const double F = chebyshev_eval(t.cheb, x);
  const double dF = 2.0 * chebyshev_eval(t.dcheb, x);
  if (t.m % 2 == 1) {
    if (dA_du) *dA_du = e * dF + F / (2.0 * e);
    return e * F;
  }
  if (dA_du) *dA_du = dF;
  return F;
}

QValue CoeffTable::eval_terms(const std::vector<Term>& terms, double G, double g) const {
  check_G(G);
  const double u = std::max(0.0, 1.0 - G * G);
  const double e = std::sqrt(u);
  QValue out;
  for (const auto& t : terms) {
    double dA = 0.0;
    const double A = eval_term(t, u, e, &dA);
    const double cm = std::cos(t.m * g);
    const double sm = std::sin(t.m * g);
    out.value += A * cm;
    out.dG += dA * (-2.0 * G) * cm;
    out.dg -= A * t.m * sm;
  }
  return out;
}

double CoeffTable::q(int nu, double G, double g) const { return q_with_derivatives(nu, G, g).value; }

QValue CoeffTable::q_with_derivatives(int nu, double G, double g) const {
  if (nu < 1 || nu > nu_max_) throw std::out_of_range("CoeffTable: order out of range");
  return eval_terms(orders_[static_cast<std::size_t>(nu)].q_terms, G, g);
}

double CoeffTable::tilde_q(int nu, int m, double G) const {
  if (nu < 1 || nu > nu_max_) throw std::out_of_range("CoeffTable: order out of range");
  check_G(G);
  const double u = std::max(0.0, 1.0 - G * G);
  for (const auto& t : orders_[static_cast<std::size_t>(nu)].q_terms) {
    if (t.m == m) return eval_term(t, u, std::sqrt(u), nullptr);
  }
  return 0.0;
}

double CoeffTable::legendre_average(int k, double G, double g) const {
  if (k == 0) return 1.0;
  if (k < 0 || k > nu_max_) throw std::out_of_range("CoeffTable: order out of range");
  return eval_terms(orders_[static_cast<std::size_t>(k)].legendre_terms, G, g).value;
}

SeriesValue CoeffTable::potential(double G, double g, double r) const {
  check_G(G);
  if (!(r > 0.0)) throw DomainError("CoeffTable::potential: r must be > 0");
  const double u = std::max(0.0, 1.0 - G * G);
  const double e = std::sqrt(u);
  // cos(m g), sin(m g) by the angle-addition recurrence
  const auto mcount = static_cast<std::size_t>(nu_max_) + 1;
  double cm[64], sm[64];
  std::vector<double> cbuf, sbuf;
  double* cp = cm;
  double* sp = sm;
  if (mcount > 64) {
    cbuf.resize(mcount);
    sbuf.resize(mcount);
    cp = cbuf.data();
    sp = sbuf.data();
  }
  const double c1 = std::cos(g), s1 = std::sin(g);
  cp[0] = 1.0;
  sp[0] = 0.0;
  for (std::size_t m = 1; m < mcount; ++m) {
    cp[m] = cp[m - 1] * c1 - sp[m - 1] * s1;
    sp[m] = sp[m - 1] * c1 + cp[m - 1] * s1;
  }

  const double inv_r = 1.0 / r;
  SeriesValue out;
  out.value = -inv_r;
  out.dr = inv_r * inv_r;
  const double ratio = beta_ * inv_r;
  double scale = inv_r;  // (beta/r)^nu / r
  for (int nu = 1; nu <= nu_max_; ++nu) {
    scale *= ratio;
    double q = 0.0, qG = 0.0, qg = 0.0;
    for (const auto& t : orders_[static_cast<std::size_t>(nu)].q_terms) {
      double dA = 0.0;
      const double A = eval_term(t, u, e, &dA);
      const auto m = static_cast<std::size_t>(t.m);
      q += A * cp[m];
      qG += dA * cp[m];
      qg -= A * t.m * sp[m];
    }
    qG *= -2.0 * G;
    out.value += q * scale;
    out.dG += qG * scale;
    out.dg += qg * scale;
    out.dr -= (nu + 1) * q * scale * inv_r;
  }
  return out;
}

nlohmann::json CoeffTable::to_json(const std::vector<double>& G_grid) const {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int nu = 1; nu <= nu_max_; ++nu) {
    for (const auto& t : orders_[static_cast<std::size_t>(nu)].q_terms) {
      nlohmann::json values = nlohmann::json::array();
      for (double G : G_grid) values.push_back(tilde_q(nu, t.m, G));
      nlohmann::json entry{{"nu", nu}, {"m", t.m}, {"G", G_grid}, {"values", values}};
      if (t.m % 2 == 0) entry["p"] = t.m / 2;
      coeffs.push_back(std::move(entry));
    }
  }
  return {{"nu_max", nu_max_},
          {"beta", params_.beta},
          {"betabar", params_.betabar},
          {"frame", params_.frame == Frame::jacobi ? "jacobi" : "one_centric"},
          {"coefficients", std::move(coeffs)}};
}

double series_hamiltonian(const PlanarSecularState& s, const CoeffTable& table) {
  const double dc = s.C - s.G;
  return 0.5 * s.R * s.R + dc * dc / (2.0 * s.r * s.r) + table.potential(s.G, s.g, s.r).value;
}

int stabilized_nu_max(const MassParams& params, const PlanarSecularState& probe, int start,
                      double rel_tol, int cap) {
  int nu = std::max(start, 1);
  double h = series_hamiltonian(probe, CoeffTable::build(params, nu));
  while (nu + 2 <= cap) {
    const double h2 = series_hamiltonian(probe, CoeffTable::build(params, nu + 2));
    const double scale = std::max(std::abs(h2), std::numeric_limits<double>::min());
    if (std::abs(h2 - h) <= rel_tol * scale) return nu;
    nu += 2;
    h = h2;
  }
  throw ConvergenceError("stabilized_nu_max: series did not settle by nu_max = " +
                         std::to_string(cap));
}

double h_slow0(double G, double g, double C, double beta, double r0) {
  const double r2 = r0 * r0;
  const double r3 = r2 * r0;
  const double b2 = beta * beta;
  return (-2.0 * C * G + G * G) / (2.0 * r2) - b2 * (5.0 - 3.0 * G * G) / (8.0 * r3) -
         15.0 * b2 * (1.0 - G * G) * std::cos(2.0 * g) / (8.0 * r3);
}

std::pair<double, double> fast_equilibrium(double C) {
  if (C == 0.0) throw DomainError("fast_equilibrium: C = 0 has no fast equilibrium");
  return {0.0, C * C};
}

}  // namespace perihelion
