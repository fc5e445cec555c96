#pragma once

// Adaptive RKF7(8) integration of small autonomous systems, dense output by
// re-stepping, section-crossing events, and the concrete vector fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "perihelion/errors.hpp"
#include "perihelion/euler_center.hpp"
#include "perihelion/secular.hpp"

namespace perihelion {

template <std::size_t N>
using State = std::array<double, N>;

struct IntegratorOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  double initial_step = 0.0;  ///< 0 picks one from the field
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;
};

template <std::size_t N>
struct StepRecord {
  double t0 = 0.0;
  double t1 = 0.0;
  State<N> x0{};
  State<N> x1{};
};

template <std::size_t N>
struct Trajectory {
  std::vector<double> t;
  std::vector<State<N>> x;
  std::vector<double> energy;  ///< empty when the system has no energy()
  int interpolation_order = 8;
  std::size_t rejected_steps = 0;

  double relative_energy_drift() const {
    if (energy.size() < 2) return 0.0;
    const double ref = std::max(std::abs(energy.front()), std::numeric_limits<double>::min());
    double worst = 0.0;
    for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()) / ref);
    return worst;
  }
};

enum class Direction { increasing, decreasing, both };

/// Scalar event g(x, t; step start). The step-start argument lets a function
/// fix a branch (e.g. of an angle) for the duration of one step. Direction is
/// measured in physical time, so backward runs see the same orientation.
template <std::size_t N>
struct EventSpec {
  std::function<double(const State<N>& x, double t, const State<N>& step_start)> fn;
  Direction direction = Direction::both;
  double tolerance = 1e-12;  ///< time tolerance of the root
  double min_time = 0.0;     ///< crossings within this |t - t_start| are ignored
};

template <std::size_t N>
struct EventHit {
  double t = 0.0;
  State<N> x{};
};

template <class Sys>
concept HasEnergy = requires(const Sys& s, const State<Sys::dim>& x) {
  { s.energy(x) } -> std::convertible_to<double>;
};

/// Embedded Runge-Kutta-Fehlberg 7(8) (Boost.Odeint stepper) with a scalar
/// step controller. err = max_i |xerr_i| / (atol + rtol max(|x0_i|, |x1_i|)).
template <class Sys>
class Rkf78 {
 public:
  static constexpr std::size_t N = Sys::dim;
  using StateT = State<N>;

  Rkf78(const Sys& sys, IntegratorOptions opts = {}) : sys_(sys), opts_(opts) {}

  const IntegratorOptions& options() const { return opts_; }

  /// One step of size dt; returns the error norm.
  double trial(double t, const StateT& x, double dt, StateT& out) const {
    StateT err{};
    stepper_.do_step(rhs(), x, t, out, dt, err);
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double scale = opts_.atol + opts_.rtol * std::max(std::abs(x[i]), std::abs(out[i]));
      const double e = std::abs(err[i]) / scale;
      if (!(e <= worst)) worst = e;  // also propagates NaN
    }
    return worst;
  }

  /// State at t inside an accepted step: one RKF step from the step start.
  /// The sub-step is shorter than the accepted one, so its error is smaller.
  StateT dense(const StepRecord<N>& rec, double t) const {
    if (t == rec.t0) return rec.x0;
    if (t == rec.t1) return rec.x1;
    StateT out{}, err{};
    stepper_.do_step(rhs(), rec.x0, rec.t0, out, t - rec.t0, err);
    return out;
  }

  /// Integrates from t0 towards t1 (either direction). `observer(rec)` is
  /// called after every accepted step and may return false to stop. Returns
  /// the last accepted record.
  template <class Observer>
  StepRecord<N> run(double t0, const StateT& x0, double t1, Observer&& observer) const {
    StepRecord<N> rec;
    rec.t0 = rec.t1 = t0;
    rec.x0 = rec.x1 = x0;
    if (t1 == t0) return rec;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double h = opts_.initial_step > 0.0 ? opts_.initial_step : initial_step(t0, x0);
    h = std::min(h, opts_.max_step);
    double t = t0;
    StateT x = x0;
    StateT out{};
    rejected_ = 0;
    for (std::size_t steps = 0; steps < opts_.max_steps; ++steps) {
      const double remaining = std::abs(t1 - t);
      const bool last = h >= remaining;
      const double dt = last ? dir * remaining : dir * h;
      const double err = trial(t, x, dt, out);
      if (err <= 1.0) {
        rec.t0 = t;
        rec.x0 = x;
        rec.t1 = last ? t1 : t + dt;
        rec.x1 = out;
        t = rec.t1;
        x = out;
        if (!observer(rec) || last) return rec;
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.125), 0.2, 5.0);
        h = std::min(std::abs(dt) * factor, opts_.max_step);
      } else {
        ++rejected_;
        const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.125)) : 0.2;
        h = std::abs(dt) * factor;
      }
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
      if (h < floor) {
        throw StepCollapseError("integrator step collapsed to " + std::to_string(h) + " at t = " +
                                std::to_string(t));
      }
    }
    throw ConvergenceError("integrator exceeded max_steps");
  }

  std::size_t rejected_steps() const { return rejected_; }

 private:
  auto rhs() const {
    return [this](const StateT& x, StateT& dxdt, double t) { sys_(x, dxdt, t); };
  }

  double initial_step(double t0, const StateT& x0) const {
    StateT f{};
    sys_(x0, f, t0);
    double xn = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double scale = opts_.atol + opts_.rtol * std::abs(x0[i]);
      xn = std::max(xn, std::abs(x0[i]) / scale);
      fn = std::max(fn, std::abs(f[i]) / scale);
    }
    double h = (xn < 1e-5 || fn < 1e-5) ? 1e-6 : 0.01 * xn / fn;
    return std::max(h, 1e-12);
  }

  const Sys& sys_;
  IntegratorOptions opts_;
  mutable boost::numeric::odeint::runge_kutta_fehlberg78<StateT> stepper_;
  mutable std::size_t rejected_ = 0;
};

/// Root of the event inside one accepted step, or nullopt when the step has
/// no admissible crossing. Bracketed secant with the Illinois modification.
template <class Sys>
std::optional<EventHit<Sys::dim>> refine_event(const Rkf78<Sys>& integ,
                                               const StepRecord<Sys::dim>& rec,
                                               const EventSpec<Sys::dim>& spec, double t_start) {
  constexpr std::size_t N = Sys::dim;
  const double f0 = spec.fn(rec.x0, rec.t0, rec.x0);
  const double f1 = spec.fn(rec.x1, rec.t1, rec.x0);
  if (f0 == 0.0 || !std::isfinite(f0) || !std::isfinite(f1)) return std::nullopt;
  if (f1 != 0.0 && (f0 > 0.0) == (f1 > 0.0)) return std::nullopt;
  const double dt = rec.t1 - rec.t0;
  // sign of d(fn)/dt in physical time
  const bool increasing = ((f1 - f0) > 0.0) == (dt > 0.0);
  if (spec.direction == Direction::increasing && !increasing) return std::nullopt;
  if (spec.direction == Direction::decreasing && increasing) return std::nullopt;

  double a = rec.t0, fa = f0;
  double b = rec.t1, fb = f1;
  EventHit<N> hit{b, rec.x1};
  if (fb != 0.0) {
    const double tol = std::max(spec.tolerance, 4.0 * std::numeric_limits<double>::epsilon() *
                                                    std::max(std::abs(a), std::abs(b)));
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      double c = b - fb * (b - a) / (fb - fa);
      if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
      const State<N> xc = integ.dense(rec, c);
      const double fc = spec.fn(xc, c, rec.x0);
      hit = {c, xc};
      if (fc == 0.0) break;
      if ((fc > 0.0) == (fb > 0.0)) {
        b = c;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
      if (std::abs(b - a) <= tol) break;
    }
  }
  if (std::abs(hit.t - t_start) <= spec.min_time) return std::nullopt;
  return hit;
}

/// Integrates and records every accepted step (plus energy when available).
template <class Sys>
Trajectory<Sys::dim> integrate(const Sys& sys, const State<Sys::dim>& x0, double t0, double t1,
                               const IntegratorOptions& opts = {}) {
  Rkf78<Sys> integ(sys, opts);
  Trajectory<Sys::dim> traj;
  auto record = [&](double t, const State<Sys::dim>& x) {
    traj.t.push_back(t);
    traj.x.push_back(x);
    if constexpr (HasEnergy<Sys>) traj.energy.push_back(sys.energy(x));
  };
  record(t0, x0);
  integ.run(t0, x0, t1, [&](const StepRecord<Sys::dim>& rec) {
    record(rec.t1, rec.x1);
    return true;
  });
  traj.rejected_steps = integ.rejected_steps();
  return traj;
}

/// First admissible crossing along a stored trajectory (re-integrates each
/// step for the dense output).
template <class Sys>
std::optional<EventHit<Sys::dim>> detect_event(const Sys& sys, const Trajectory<Sys::dim>& traj,
                                               const EventSpec<Sys::dim>& spec,
                                               const IntegratorOptions& opts = {}) {
  Rkf78<Sys> integ(sys, opts);
  for (std::size_t k = 0; k + 1 < traj.t.size(); ++k) {
    StepRecord<Sys::dim> rec{traj.t[k], traj.t[k + 1], traj.x[k], traj.x[k + 1]};
    if (auto hit = refine_event(integ, rec, spec, traj.t.front())) return hit;
  }
  return std::nullopt;
}

/// Integrates until the first admissible crossing or t_max; nullopt on no crossing.
template <class Sys>
std::optional<EventHit<Sys::dim>> integrate_to_event(const Sys& sys, const State<Sys::dim>& x0,
                                                     double t0, double t_max,
                                                     const EventSpec<Sys::dim>& spec,
                                                     const IntegratorOptions& opts = {}) {
  Rkf78<Sys> integ(sys, opts);
  std::optional<EventHit<Sys::dim>> found;
  integ.run(t0, x0, t_max, [&](const StepRecord<Sys::dim>& rec) {
    found = refine_event(integ, rec, spec, t0);
    return !found.has_value();
  });
  return found;
}

// ---------------------------------------------------------------------------
// Vector fields

/// Secular flow of hat-H_J (series form) on (R, G, r, g).
class SecularSystem {
 public:
  static constexpr std::size_t dim = 4;
  enum Index : std::size_t { kR = 0, kG = 1, kr = 2, kg = 3 };

  /// The table must outlive the system.
  SecularSystem(const CoeffTable& table, double C, double guard_factor = 1.5);

  void operator()(const State<4>& x, State<4>& dxdt, double t) const;
  double energy(const State<4>& x) const;
  /// H with R = 0.
  double energy_without_R(double G, double r, double g) const;
  /// Throws SeriesDomainError when r < guard_factor beta^* (1 + e) or |G| > 1.
  void check_domain(const State<4>& x) const;

  double C() const { return C_; }
  const CoeffTable& table() const { return table_; }

 private:
  const CoeffTable& table_;
  double C_;
  double guard_factor_;
};

inline State<4> to_state(const PlanarSecularState& s) { return {s.R, s.G, s.r, s.g}; }
inline PlanarSecularState from_state(const State<4>& x, double C) {
  return {x[0], x[1], x[2], x[3], C, 1.0};
}

/// E0 model flow on (G, g) at fixed r: dG/dt = -dE0/dg, dg/dt = dE0/dG.
class E0System {
 public:
  static constexpr std::size_t dim = 2;
  explicit E0System(double r) : r_(r) {}
  void operator()(const State<2>& x, State<2>& dxdt, double t) const;
  double energy(const State<2>& x) const { return e0_planar(r_, x[0], x[1]); }

 private:
  double r_;
};

/// Two-centre flow on (x, y) in R^3 x R^3.
class EulerSystem {
 public:
  static constexpr std::size_t dim = 6;
  explicit EulerSystem(EulerConfig cfg) : cfg_(cfg) {}
  void operator()(const State<6>& s, State<6>& dsdt, double t) const;
  double energy(const State<6>& s) const;
  double integral(const State<6>& s) const;
  static State<6> pack(const CartesianState& c);
  static CartesianState unpack(const State<6>& s);

 private:
  EulerConfig cfg_;
};

// ---------------------------------------------------------------------------
// Libration experiment

struct LibrationConfig {
  double beta = 80.0;
  double betabar = 80.0;
  int nu_max = 16;
  double r0_factor = 4.0;      ///< r0 = r0_factor * beta^*
  double escape_fraction = 0.7;  ///< R0 = escape_fraction * sqrt(2 / r0), outward
  double stop_factor = 3.05;     ///< run ends when r falls below stop_factor * beta^*
  double g_center = 3.14159265358979323846;
  double G_center = 0.0;
  double box_g = 0.05;         ///< half-widths of the initial box
  double box_G = 0.02;
  double nbhd_g = 0.6;         ///< half-widths of the declared neighbourhood
  double nbhd_G = 0.3;
  double t_max = 1e9;          ///< hard cap on the run time
  std::size_t n_orbits = 20;
  double tol = 1e-11;
};

struct LibrationOrbit {
  double g0 = 0.0;
  double G0 = 0.0;
  double winding = 0.0;         ///< |accumulated angle| of (g - g_c, G - G_c)
  bool stayed_in_neighbourhood = true;
  bool left_trust_region = false;
  double t_end = 0.0;
  double r_max = 0.0;
};

struct LibrationReport {
  LibrationConfig config;
  std::vector<LibrationOrbit> orbits;
  std::size_t count_winding_2pi() const;
  bool all_pass() const;
};

/// C = 0 ensemble on a deterministic grid in the box. Each orbit starts at
/// r0 moving outwards and runs until r falls back below stop_factor beta^*
/// (one radial excursion) or t_max. Leaving the series trust region is
/// reported, not fatal.
LibrationReport libration_experiment(const LibrationConfig& cfg);

}  // namespace perihelion
