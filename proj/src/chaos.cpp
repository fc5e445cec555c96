#include "perihelion/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <tuple>

#include "perihelion/angles.hpp"
#include "perihelion/errors.hpp"
#include "perihelion/parallel.hpp"

namespace perihelion {

using K = SecularSystem::Index;

SectionPoint chart_difference(SectionPoint a, SectionPoint b, double g_period) {
  const double dg = g_period > 0.0 ? wrap_centered(a.g - b.g, g_period) : a.g - b.g;
  return {dg, a.G - b.G};
}

double chart_distance(SectionPoint a, SectionPoint b, double g_period) {
  const SectionPoint d = chart_difference(a, b, g_period);
  return std::hypot(d.g, d.G);
}

// ---------------------------------------------------------------------------
// Section

SectionPlane SectionPlane::from_pivot(const SecularSystem& sys, const State<4>& pivot) {
  State<4> f{};
  sys(pivot, f, 0.0);
  SectionPlane p;
  p.R_star = pivot[K::kR];
  p.G_star = pivot[K::kG];
  p.r_star = pivot[K::kr];
  p.g_star = pivot[K::kg];
  p.v_r = f[K::kr];
  p.v_G = f[K::kG];
  p.v_g = f[K::kg];
  if (p.v_r == 0.0) throw DomainError("section: v_r vanishes at the pivot, planarity cannot fix r");
  p.c = sys.energy(pivot);
  p.R_sign = pivot[K::kR] < 0.0 ? -1.0 : 1.0;
  // the pivot velocity dotted with the normal V* is |V*|^2 > 0
  p.orientation = 1.0;
  return p;
}

double SectionPlane::value(const State<4>& x, int k) const {
  return v_r * (x[K::kr] - r_star) + v_G * (x[K::kG] - G_star) +
         v_g * (x[K::kg] - g_star - k * kPi);
}

int SectionPlane::branch(double g) const {
  return static_cast<int>(std::lround((g - g_star) / kPi));
}

nlohmann::json SectionPlane::to_json() const {
  return {{"R_star", R_star}, {"G_star", G_star}, {"r_star", r_star}, {"g_star", g_star},
          {"V_star", {v_r, v_G, v_g}}, {"c", c}, {"R_sign", R_sign},
          {"orientation", orientation}};
}

State<4> default_pivot() { return {-0.0060, -0.804, 652.256, 1.4524}; }

State<4> lift(SectionPoint z, const SectionPlane& plane, const SecularSystem& sys) {
  if (!(std::abs(z.G) < 1.0)) {
    throw LiftError("lift: |G| >= 1 (G = " + std::to_string(z.G) + ")");
  }
  const double dg = wrap_centered(z.g - plane.g_star, kPi);
  const double g = plane.g_star + dg;
  const double r = plane.r_star - (plane.v_G * (z.G - plane.G_star) + plane.v_g * dg) / plane.v_r;
  if (!(r > 0.0)) throw LiftError("lift: planarity gives r <= 0");
  State<4> x{0.0, z.G, r, g};
  sys.check_domain(x);
  const double disc = 2.0 * (plane.c - sys.energy_without_R(z.G, r, g));
  if (!(disc >= 0.0)) {
    throw LiftError("lift: seed is off the energy shell (2(c - H|R=0) = " + std::to_string(disc) +
                    ")");
  }
  x[K::kR] = plane.R_sign * std::sqrt(disc);
  return x;
}

SectionPoint project(const State<4>& x) { return {wrap_positive(x[K::kg], kPi), x[K::kG]}; }

// ---------------------------------------------------------------------------
// Poincare map

PoincareMap::PoincareMap(const SecularSystem& sys, SectionPlane plane, PoincareOptions opts)
    : sys_(sys), plane_(plane), opts_(opts) {}

ReturnResult PoincareMap::run(SectionPoint z, double direction) const {
  const State<4> x0 = lift(z, plane_, sys_);
  const Rkf78<SecularSystem> integ(sys_, opts_.integrator);
  EventSpec<4> spec;
  spec.fn = [this](const State<4>& x, double, const State<4>& start) {
    return plane_.value(x, plane_.branch(start[K::kg]));
  };
  spec.direction = plane_.orientation > 0.0 ? Direction::increasing : Direction::decreasing;
  spec.min_time = opts_.min_return_time;

  std::optional<EventHit<4>> hit;
  integ.run(0.0, x0, direction * opts_.t_max, [&](const StepRecord<4>& rec) {
    hit = refine_event(integ, rec, spec, 0.0);
    return !hit.has_value();
  });
  if (!hit) {
    throw NoReturnError("Poincare map: no return within |t| <= " + std::to_string(opts_.t_max));
  }

  State<4> f{};
  sys_(hit->x, f, hit->t);
  const double dot = plane_.v_r * f[K::kr] + plane_.v_G * f[K::kG] + plane_.v_g * f[K::kg];
  const double nv = std::sqrt(plane_.v_r * plane_.v_r + plane_.v_G * plane_.v_G +
                              plane_.v_g * plane_.v_g);
  const double nf = std::sqrt(f[K::kr] * f[K::kr] + f[K::kG] * f[K::kG] + f[K::kg] * f[K::kg]);
  const double tr = dot / (nv * nf);
  if (!(plane_.orientation * tr > opts_.transversality)) {
    throw ConvergenceError("Poincare map: crossing is not transversal (cos = " +
                           std::to_string(tr) + ")");
  }
  return {project(hit->x), hit->t, hit->x, tr};
}

ReturnResult PoincareMap::forward_detail(SectionPoint z) const { return run(z, 1.0); }
ReturnResult PoincareMap::backward_detail(SectionPoint z) const { return run(z, -1.0); }

MapView PoincareMap::view() const {
  return {[this](SectionPoint z) { return (*this)(z); }, kPi};
}

MapView PoincareMap::inverse_view() const {
  return {[this](SectionPoint z) { return inverse(z); }, kPi};
}

// ---------------------------------------------------------------------------
// Linearisation

namespace {

SectionPoint shifted(SectionPoint z, int axis, double h) {
  if (axis == 0) z.g += h;
  else z.G += h;
  return z;
}

std::array<double, 2> central(const MapView& map, SectionPoint z, int axis, double h) {
  const SectionPoint d =
      chart_difference(map.f(shifted(z, axis, h)), map.f(shifted(z, axis, -h)), map.g_period);
  return {d.g / (2.0 * h), d.G / (2.0 * h)};
}

SectionPoint normalized(double a, double b) {
  const double n = std::hypot(a, b);
  return {a / n, b / n};
}

}  // namespace

Mat2 jacobian(const MapView& map, SectionPoint z, const JacobianOptions& opts) {
  Mat2 m{};
  for (int axis = 0; axis < 2; ++axis) {
    auto col = central(map, z, axis, opts.step);
    if (opts.richardson) {
      const auto half = central(map, z, axis, 0.5 * opts.step);
      for (int i = 0; i < 2; ++i) col[i] = (4.0 * half[i] - col[i]) / 3.0;
    }
    m[0][axis] = col[0];
    m[1][axis] = col[1];
  }
  return m;
}

Eigen2 eigen2(const Mat2& m) {
  const double a = m[0][0], b = m[0][1], c = m[1][0], d = m[1][1];
  const double half_tr = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = half_tr * half_tr - det;
  Eigen2 e;
  if (disc < 0.0) {
    e.real = false;
    const double im = std::sqrt(-disc);
    e.values = {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
    return e;
  }
  const double s = std::sqrt(disc);
  // larger-magnitude root first, the other from the determinant for accuracy
  const double l0 = half_tr >= 0.0 ? half_tr + s : half_tr - s;
  const double l1 = l0 != 0.0 ? det / l0 : half_tr - s;
  e.values = {l0, l1};
  for (int k = 0; k < 2; ++k) {
    const double l = k == 0 ? l0 : l1;
    // (A - l I) v = 0: pick the better conditioned row
    const double r0 = std::hypot(b, l - a);
    const double r1 = std::hypot(l - d, c);
    if (r0 == 0.0 && r1 == 0.0) {
      e.vectors[k] = k == 0 ? SectionPoint{1.0, 0.0} : SectionPoint{0.0, 1.0};
    } else if (r0 >= r1) {
      e.vectors[k] = normalized(b, l - a);
    } else {
      e.vectors[k] = normalized(l - d, c);
    }
  }
  return e;
}

const char* to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::hyperbolic: return "hyperbolic";
    case FixedPointClass::elliptic: return "elliptic";
    default: return "other";
  }
}

FixedPointRecord classify_fixed_point(const MapView& map, SectionPoint z,
                                      const JacobianOptions& opts) {
  FixedPointRecord fp;
  fp.z = z;
  fp.residual = chart_distance(map.f(z), z, map.g_period);
  fp.jac = jacobian(map, z, opts);
  fp.eigen = eigen2(fp.jac);
  if (fp.eigen.real) {
    const double l0 = fp.eigen.values[0].real();
    const double l1 = fp.eigen.values[1].real();
    if (std::abs(l0) > 1.0 && std::abs(l1) < 1.0) {
      fp.cls = FixedPointClass::hyperbolic;
      fp.lambda_unstable = l0;
      fp.lambda_stable = l1;
      fp.v_unstable = fp.eigen.vectors[0];
      fp.v_stable = fp.eigen.vectors[1];
    }
  } else {
    fp.cls = FixedPointClass::elliptic;
  }
  return fp;
}

std::optional<SectionPoint> newton_solve(const MapView& map, SectionPoint seed,
                                         const NewtonOptions& opts) {
  auto residual = [&](SectionPoint z) { return chart_difference(map.f(z), z, map.g_period); };
  auto norm = [](SectionPoint d) { return std::hypot(d.g, d.G); };
  try {
    SectionPoint z = seed;
    SectionPoint F = residual(z);
    double nF = norm(F);
    SectionPoint best = z;
    double best_n = nF;
    for (int it = 0; it < opts.max_iterations && nF > opts.tolerance; ++it) {
      Mat2 J = jacobian(map, z, opts.newton_jacobian);
      J[0][0] -= 1.0;
      J[1][1] -= 1.0;
      const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
      if (!(std::abs(det) > 0.0)) return std::nullopt;
      double dg = -(J[1][1] * F.g - J[0][1] * F.G) / det;
      double dG = -(-J[1][0] * F.g + J[0][0] * F.G) / det;
      const double step = std::hypot(dg, dG);
      if (step > opts.max_step) {
        dg *= opts.max_step / step;
        dG *= opts.max_step / step;
      }
      // backtrack while the residual grows
      double lambda = 1.0;
      SectionPoint trial{}, Ft{};
      double nt = std::numeric_limits<double>::infinity();
      for (int bt = 0; bt < 6; ++bt) {
        trial = {z.g + lambda * dg, z.G + lambda * dG};
        if (map.g_period > 0.0) trial.g = wrap_positive(trial.g, map.g_period);
        try {
          Ft = residual(trial);
          nt = norm(Ft);
        } catch (const std::runtime_error&) {
          nt = std::numeric_limits<double>::infinity();
        }
        if (nt < nF) break;
        lambda *= 0.5;
      }
      if (!(nt < nF)) break;
      z = trial;
      F = Ft;
      nF = nt;
      if (nF < best_n) {
        best = z;
        best_n = nF;
      }
    }
    if (best_n <= opts.accept_residual) return best;
  } catch (const std::runtime_error&) {
    // map undefined along the way: the seed is dropped
  }
  return std::nullopt;
}

std::size_t FixedPointCensus::count(FixedPointClass c) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [c](const auto& p) { return p.cls == c; }));
}

FixedPointCensus newton_fixed_points(const MapView& map, const std::vector<SectionPoint>& seeds,
                                     const NewtonOptions& opts) {
  std::vector<std::optional<SectionPoint>> roots(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { roots[i] = newton_solve(map, seeds[i], opts); });

  FixedPointCensus census;
  census.seeds = seeds.size();
  std::vector<SectionPoint> unique;
  for (const auto& r : roots) {
    if (!r) continue;
    ++census.converged;
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](SectionPoint u) {
      return chart_distance(u, *r, map.g_period) <= opts.dedup_distance;
    });
    if (!dup) unique.push_back(*r);
  }
  census.dropped = census.seeds - census.converged;
  census.points.resize(unique.size());
  std::vector<char> ok(unique.size(), 1);
  parallel_for(unique.size(), [&](std::size_t i) {
    try {
      census.points[i] = classify_fixed_point(map, unique[i], opts.final_jacobian);
    } catch (const std::runtime_error&) {
      ok[i] = 0;
    }
  });
  std::vector<FixedPointRecord> kept;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (ok[i]) kept.push_back(census.points[i]);
  }
  census.points = std::move(kept);
  return census;
}

std::vector<SectionPoint> seed_grid(double g0, double g1, std::size_t ng, double G0, double G1,
                                    std::size_t nG) {
  std::vector<SectionPoint> out;
  out.reserve(ng * nG);
  for (std::size_t j = 0; j < nG; ++j) {
    for (std::size_t i = 0; i < ng; ++i) {
      const double tg = ng > 1 ? static_cast<double>(i) / (ng - 1) : 0.5;
      const double tG = nG > 1 ? static_cast<double>(j) / (nG - 1) : 0.5;
      out.push_back({g0 + (g1 - g0) * tg, G0 + (G1 - G0) * tG});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifolds

namespace {

struct Sample {
  double theta;
  SectionPoint image;
};

// turning angle at b of the path a -> b -> c
double turn(SectionPoint a, SectionPoint b, SectionPoint c, double period) {
  const SectionPoint u = chart_difference(b, a, period);
  const SectionPoint v = chart_difference(c, b, period);
  const double cross = u.g * v.G - u.G * v.g;
  const double dot = u.g * v.g + u.G * v.G;
  return std::abs(std::atan2(cross, dot));
}

}  // namespace

Manifold grow_manifold(const FixedPointRecord& fp, ManifoldKind kind, const MapView& forward,
                       const MapView& inverse, const ManifoldOptions& opts) {
  if (fp.cls != FixedPointClass::hyperbolic) {
    throw DomainError("grow_manifold: fixed point is not hyperbolic");
  }
  const bool unstable = kind == ManifoldKind::unstable;
  const MapView& map = unstable ? forward : inverse;
  const SectionPoint v = unstable ? fp.v_unstable : fp.v_stable;
  const double lambda = std::abs(unstable ? fp.lambda_unstable : 1.0 / fp.lambda_stable);
  const double period = map.g_period;

  Manifold out;
  out.kind = kind;
  out.fixed_point = fp.z;

  for (int b = 0; b < 2; ++b) {
    ManifoldBranch& branch = out.branches[b];
    branch.sign = b == 0 ? 1 : -1;
    auto seed = [&](double theta) {
      const double d = branch.sign * opts.delta0 * std::pow(lambda, theta);
      return SectionPoint{fp.z.g + d * v.g, fp.z.G + d * v.G};
    };
    // image of the seed at theta after `level` applications
    auto image = [&](double theta, std::size_t level) {
      SectionPoint x = seed(theta);
      for (std::size_t k = 0; k < level; ++k) x = map.f(x);
      return x;
    };

    std::vector<Sample> samples(opts.initial_points + 1);
    for (std::size_t i = 0; i <= opts.initial_points; ++i) {
      const double th = static_cast<double>(i) / opts.initial_points;
      samples[i] = {th, seed(th)};
    }
    double arc = 0.0;
    std::optional<SectionPoint> prev;
    for (std::size_t level = 0; level <= opts.iterations && !branch.truncated; ++level) {
      try {
        if (level > 0) {
          parallel_for(samples.size(),
                       [&](std::size_t i) { samples[i].image = map.f(samples[i].image); });
        }
        // refine where neighbours spread apart or the polyline bends
        for (;;) {
          std::vector<double> inserts;
          for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            bool split = chart_distance(samples[i].image, samples[i + 1].image, period) >
                         opts.max_spacing;
            if (!split && i + 2 < samples.size()) {
              split = turn(samples[i].image, samples[i + 1].image, samples[i + 2].image, period) >
                      opts.max_turn;
            }
            if (split && samples[i + 1].theta - samples[i].theta > 1e-9) {
              inserts.push_back(0.5 * (samples[i].theta + samples[i + 1].theta));
            }
          }
          if (inserts.empty()) break;
          if (samples.size() + inserts.size() > opts.max_points) {
            branch.truncated = true;
            break;
          }
          std::vector<Sample> added(inserts.size());
          parallel_for(inserts.size(),
                       [&](std::size_t i) { added[i] = {inserts[i], image(inserts[i], level)}; });
          samples.insert(samples.end(), added.begin(), added.end());
          std::sort(samples.begin(), samples.end(),
                    [](const Sample& x, const Sample& y) { return x.theta < y.theta; });
        }
      } catch (const std::runtime_error&) {
        branch.truncated = true;
        break;
      }
      for (std::size_t i = (level == 0 ? 0 : 1); i < samples.size(); ++i) {
        SectionPoint p = samples[i].image;
        if (prev) {
          // keep g continuous across the seam of the chart
          p.g = prev->g + chart_difference(p, *prev, period).g;
          arc += chart_distance(p, *prev, 0.0);
        }
        branch.points.push_back(p);
        branch.level.push_back(level);
        prev = p;
      }
      if (arc > opts.arc_budget) break;
    }
  }
  return out;
}

double polyline_distance(const std::vector<SectionPoint>& a, const std::vector<SectionPoint>& b,
                         double g_period) {
  auto point_segment = [&](SectionPoint p, SectionPoint s0, SectionPoint s1) {
    const SectionPoint d = chart_difference(s1, s0, g_period);
    const SectionPoint w = chart_difference(p, s0, g_period);
    const double len2 = d.g * d.g + d.G * d.G;
    double t = len2 > 0.0 ? (w.g * d.g + w.G * d.G) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(w.g - t * d.g, w.G - t * d.G);
  };
  auto one_way = [&](const std::vector<SectionPoint>& p, const std::vector<SectionPoint>& q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : p) {
      if (q.size() == 1) best = std::min(best, chart_distance(x, q[0], g_period));
      for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        best = std::min(best, point_segment(x, q[i], q[i + 1]));
      }
    }
    return best;
  };
  return std::min(one_way(a, b), one_way(b, a));
}

// ---------------------------------------------------------------------------
// h-sets

SectionPoint HSet::point(double u, double s) const {
  return {q.g + u * B * vu.g + s * A * vs.g, q.G + u * B * vu.G + s * A * vs.G};
}

std::array<double, 2> HSet::coords(SectionPoint x) const {
  const SectionPoint d = chart_difference(x, q, g_period);
  // columns B vu, A vs
  const double a = B * vu.g, b = A * vs.g, c = B * vu.G, e = A * vs.G;
  const double det = a * e - b * c;
  return {(e * d.g - b * d.G) / det, (-c * d.g + a * d.G) / det};
}

nlohmann::json HSet::to_json() const {
  return {{"q", {q.g, q.G}}, {"vs", {vs.g, vs.G}}, {"vu", {vu.g, vu.G}}, {"A", A}, {"B", B}};
}

HSet make_hset(const FixedPointRecord& fp, double A, double B, double g_period) {
  if (fp.cls != FixedPointClass::hyperbolic) {
    throw DomainError("h-set: base point is not a hyperbolic fixed point");
  }
  const double cross = fp.v_unstable.g * fp.v_stable.G - fp.v_unstable.G * fp.v_stable.g;
  if (!(std::abs(cross) > 1e-12)) throw DomainError("h-set: eigenvectors are parallel");
  if (!(A > 0.0 && B > 0.0)) throw DomainError("h-set: widths must be positive");
  return {fp.z, fp.v_stable, fp.v_unstable, A, B, g_period};
}

HSetImages sample_images(const HSet& set, const MapView& map, const SamplingDensity& density,
                         const std::vector<double>& fiber_levels) {
  HSetImages out;
  out.set = set;
  out.density = density;
  out.fiber_levels = fiber_levels;
  const std::size_t ne = std::max<std::size_t>(density.edge, 2);
  const std::size_t nf = std::max<std::size_t>(density.fiber, 2);
  auto param = [](std::size_t i, std::size_t n) { return -1.0 + 2.0 * i / (n - 1); };

  // layout: left edge, right edge, top edge, bottom edge, fibers
  std::vector<SectionPoint> pts;
  pts.reserve(4 * ne + fiber_levels.size() * nf);
  for (std::size_t i = 0; i < ne; ++i) pts.push_back(set.point(-1.0, param(i, ne)));
  for (std::size_t i = 0; i < ne; ++i) pts.push_back(set.point(1.0, param(i, ne)));
  for (std::size_t i = 0; i < ne; ++i) pts.push_back(set.point(param(i, ne), 1.0));
  for (std::size_t i = 0; i < ne; ++i) pts.push_back(set.point(param(i, ne), -1.0));
  for (double q0 : fiber_levels) {
    for (std::size_t i = 0; i < nf; ++i) pts.push_back(set.point(param(i, nf), q0));
  }

  std::vector<SectionPoint> img(pts.size());
  try {
    parallel_for(pts.size(), [&](std::size_t i) { img[i] = map.f(pts[i]); });
  } catch (const std::runtime_error& e) {
    out.failed = true;
    out.failure = e.what();
    return out;
  }
  out.evaluations = pts.size();

  auto slice = [&](std::size_t block) {
    return std::vector<SectionPoint>(img.begin() + block * ne, img.begin() + (block + 1) * ne);
  };
  out.exits[0] = slice(0);
  out.exits[1] = slice(1);
  const auto top = slice(2);
  const auto bottom = slice(3);
  // closed loop: left up, top right, right down, bottom left
  out.boundary = out.exits[0];
  out.boundary.insert(out.boundary.end(), top.begin() + 1, top.end());
  out.boundary.insert(out.boundary.end(), out.exits[1].rbegin() + 1, out.exits[1].rend());
  out.boundary.insert(out.boundary.end(), bottom.rbegin() + 1, bottom.rend() - 1);
  for (std::size_t l = 0; l < fiber_levels.size(); ++l) {
    const auto first = img.begin() + 4 * ne + l * nf;
    out.fibers.emplace_back(first, first + nf);
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    default: return "inconclusive";
  }
}

namespace {

using UV = std::array<double, 2>;

// Polyline in N's (u, s) chart with g unwrapped along it; the first point is
// taken nearest to q.
std::vector<UV> to_chart(const std::vector<SectionPoint>& poly, const HSet& N) {
  std::vector<UV> out;
  out.reserve(poly.size());
  const double period = N.g_period;
  HSet flat = N;
  flat.g_period = 0.0;
  double g_prev_raw = 0.0, g_prev = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    double g;
    if (i == 0) {
      g = N.q.g + chart_difference(poly[0], N.q, period).g;
    } else {
      g = g_prev + (period > 0.0 ? wrap_centered(poly[i].g - g_prev_raw, period)
                                 : poly[i].g - g_prev_raw);
    }
    g_prev_raw = poly[i].g;
    g_prev = g;
    out.push_back(flat.coords({g, poly[i].G}));
  }
  return out;
}

// (u, s) offset produced by shifting g by one period
UV period_shift(const HSet& N) {
  HSet flat = N;
  flat.g_period = 0.0;
  const UV a = flat.coords({N.q.g + N.g_period, N.q.G});
  return a;
}

// Liang-Barsky: does the segment p0-p1 meet the closed box lo <= (u, s) <= hi?
bool segment_hits_box(UV p0, UV p1, UV lo, UV hi) {
  double t0 = 0.0, t1 = 1.0;
  const double d[2] = {p1[0] - p0[0], p1[1] - p0[1]};
  for (int k = 0; k < 2; ++k) {
    const double p[2] = {-d[k], d[k]};
    const double q[2] = {p0[k] - lo[k], hi[k] - p0[k]};
    for (int j = 0; j < 2; ++j) {
      if (p[j] == 0.0) {
        if (q[j] < 0.0) return false;
      } else {
        const double t = q[j] / p[j];
        if (p[j] < 0.0) t0 = std::max(t0, t);
        else t1 = std::min(t1, t);
        if (t0 > t1) return false;
      }
    }
  }
  return true;
}

bool segment_hits_square(UV p0, UV p1) { return segment_hits_box(p0, p1, {-1.0, -1.0}, {1.0, 1.0}); }

// does segment p0-p1 meet the entry edge s = level, |u| <= 1?
bool segment_hits_entry(UV p0, UV p1, double level) {
  const double a = p0[1] - level, b = p1[1] - level;
  if (a == 0.0 && b == 0.0) {
    return std::max(p0[0], p1[0]) >= -1.0 && std::min(p0[0], p1[0]) <= 1.0;
  }
  if ((a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)) return false;
  const double t = a / (a - b);
  const double u = p0[0] + t * (p1[0] - p0[0]);
  return std::abs(u) <= 1.0;
}

bool inside_polygon(const std::vector<UV>& poly, UV p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const UV& a = poly[i];
    const UV& b = poly[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) in = !in;
    }
  }
  return in;
}

std::vector<int> shifts(const HSet& N) {
  if (N.g_period <= 0.0) return {0};
  return {-2, -1, 0, 1, 2};
}

}  // namespace

CoveringResult check_covering(const HSetImages& images, const HSet& N) {
  CoveringResult res;
  if (images.failed) {
    res.verdict = Verdict::inconclusive;
    res.note = "map failed while sampling: " + images.failure;
    return res;
  }
  const UV shift = period_shift(N);
  const auto ks = shifts(N);

  // (1) a horizontal fiber whose image runs from one side of N to the other
  // without touching the columns |u| <= 1, |s| >= 1 above and below N
  constexpr double kFar = 1e300;
  for (std::size_t l = 0; l < images.fibers.size() && !res.fiber_ok; ++l) {
    const auto uv = to_chart(images.fibers[l], N);
    res.fiber_samples = uv.size();
    bool clear = true;
    for (std::size_t i = 0; i + 1 < uv.size() && clear; ++i) {
      if (segment_hits_box(uv[i], uv[i + 1], {-1.0, 1.0}, {1.0, kFar}) ||
          segment_hits_box(uv[i], uv[i + 1], {-1.0, -kFar}, {1.0, -1.0})) {
        clear = false;
      }
    }
    const double ua = uv.front()[0], ub = uv.back()[0];
    const bool across = (ua < -1.0 && ub > 1.0) || (ua > 1.0 && ub < -1.0);
    if (clear && across) {
      res.fiber_ok = true;
      res.fiber_level = images.fiber_levels[l];
    }
  }

  // (2) images of the exit edges miss N
  res.exit_ok = true;
  for (const auto& edge : images.exits) {
    const auto uv = to_chart(edge, N);
    res.exit_samples += uv.size();
    for (int k : ks) {
      for (std::size_t i = 0; i + 1 < uv.size() && res.exit_ok; ++i) {
        const UV a{uv[i][0] - k * shift[0], uv[i][1] - k * shift[1]};
        const UV b{uv[i + 1][0] - k * shift[0], uv[i + 1][1] - k * shift[1]};
        if (segment_hits_square(a, b)) res.exit_ok = false;
      }
    }
  }

  // (3) the image region misses the entry edges: its boundary does not cross
  // them and their midpoints are outside it
  const auto loop = to_chart(images.boundary, N);
  res.boundary_samples = loop.size();
  // closing the loop in the unwrapped chart
  const UV first = loop.front(), last = loop.back();
  const double close_gap = std::hypot(first[0] - last[0], first[1] - last[1]);
  const double shift_len = std::hypot(shift[0], shift[1]);
  if (N.g_period > 0.0 && close_gap > 0.5 * shift_len) {
    res.note = "image of the boundary wraps around the cylinder";
    res.verdict = Verdict::inconclusive;
    return res;
  }
  res.entry_ok = true;
  for (int k : ks) {
    std::vector<UV> poly(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      poly[i] = {loop[i][0] - k * shift[0], loop[i][1] - k * shift[1]};
    }
    for (double level : {-1.0, 1.0}) {
      for (std::size_t i = 0; i < poly.size() && res.entry_ok; ++i) {
        if (segment_hits_entry(poly[i], poly[(i + 1) % poly.size()], level)) res.entry_ok = false;
      }
      if (res.entry_ok && inside_polygon(poly, {0.0, level})) res.entry_ok = false;
    }
  }

  res.verdict = res.fiber_ok && res.exit_ok && res.entry_ok ? Verdict::holds : Verdict::fails;
  return res;
}

// ---------------------------------------------------------------------------
// Horseshoe search

namespace {

// separating-axis test for two parallelograms given by their corners
bool hsets_disjoint(const HSet& a, const HSet& b) {
  std::array<SectionPoint, 4> ca, cb;
  const double su[4] = {-1, 1, 1, -1}, ss[4] = {-1, -1, 1, 1};
  const double period = a.g_period;
  const SectionPoint off = chart_difference(b.q, a.q, period);
  for (int i = 0; i < 4; ++i) {
    HSet fa = a, fb = b;
    fa.q = {0.0, 0.0};
    fb.q = off;
    ca[i] = fa.point(su[i], ss[i]);
    cb[i] = fb.point(su[i], ss[i]);
  }
  const std::array<SectionPoint, 4> axes{SectionPoint{-a.vu.G, a.vu.g}, {-a.vs.G, a.vs.g},
                                         {-b.vu.G, b.vu.g}, {-b.vs.G, b.vs.g}};
  for (const auto& ax : axes) {
    double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
    for (int i = 0; i < 4; ++i) {
      const double pa = ca[i].g * ax.g + ca[i].G * ax.G;
      const double pb = cb[i].g * ax.g + cb[i].G * ax.G;
      amin = std::min(amin, pa);
      amax = std::max(amax, pa);
      bmin = std::min(bmin, pb);
      bmax = std::max(bmax, pb);
    }
    if (amax < bmin || bmax < amin) return true;
  }
  return false;
}

}  // namespace

HorseshoeResult detect_horseshoe(const FixedPointRecord& fp1, const FixedPointRecord& fp2,
                                 const MapView& map, const HorseshoeSearch& search) {
  if (fp1.cls != FixedPointClass::hyperbolic || fp2.cls != FixedPointClass::hyperbolic) {
    throw DomainError("detect_horseshoe: both fixed points must be hyperbolic");
  }
  HorseshoeResult result;
  result.fixed_points = {fp1, fp2};
  result.density = search.density;
  const std::array<const FixedPointRecord*, 2> fps{&fp1, &fp2};

  // screen-density images per (point, A index, B index)
  std::map<std::tuple<int, std::size_t, std::size_t>, HSetImages> cache;
  auto screened = [&](int i, std::size_t ia, std::size_t ib) -> const HSetImages& {
    const auto key = std::make_tuple(i, ia, ib);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const HSet set = make_hset(*fps[i], search.A_grid[ia], search.B_grid[ib], map.g_period);
      it = cache.emplace(key, sample_images(set, map, search.screen, search.fiber_levels)).first;
    }
    return it->second;
  };

  auto relations = [&](const std::array<const HSetImages*, 2>& img, const std::array<HSet, 2>& sets) {
    std::vector<RelationRecord> out;
    for (int from = 0; from < 2; ++from) {
      for (int to = 0; to < 2; ++to) {
        RelationRecord rec;
        rec.from = from + 1;
        rec.to = to + 1;
        rec.at_default = check_covering(*img[from], sets[to]);
        out.push_back(rec);
      }
    }
    return out;
  };
  auto all_hold = [](const std::vector<RelationRecord>& rs, bool doubled) {
    return std::all_of(rs.begin(), rs.end(), [&](const RelationRecord& r) {
      return (doubled ? r.at_doubled : r.at_default).verdict == Verdict::holds;
    });
  };

  std::size_t verified = 0;
  std::vector<RelationRecord> best;
  std::array<HSet, 2> best_sets{};
  for (std::size_t a1 = 0; a1 < search.A_grid.size(); ++a1) {
    for (std::size_t b1 = 0; b1 < search.B_grid.size(); ++b1) {
      for (std::size_t a2 = 0; a2 < search.A_grid.size(); ++a2) {
        for (std::size_t b2 = 0; b2 < search.B_grid.size(); ++b2) {
          const std::array<HSet, 2> sets{
              make_hset(fp1, search.A_grid[a1], search.B_grid[b1], map.g_period),
              make_hset(fp2, search.A_grid[a2], search.B_grid[b2], map.g_period)};
          if (!hsets_disjoint(sets[0], sets[1])) continue;
          ++result.candidates_screened;
          const auto rs = relations({&screened(0, a1, b1), &screened(1, a2, b2)}, sets);
          const auto holding = static_cast<std::size_t>(std::count_if(
              rs.begin(), rs.end(),
              [](const RelationRecord& r) { return r.at_default.verdict == Verdict::holds; }));
          if (holding > result.best_partial || best.empty()) {
            result.best_partial = std::max(result.best_partial, holding);
            best = rs;
            best_sets = sets;
          }
          if (holding < 4 || verified >= search.max_verified) continue;
          ++verified;

          // full density, then doubled
          std::array<HSetImages, 2> full, twice;
          const SamplingDensity dbl{2 * search.density.edge, 2 * search.density.fiber};
          for (int i = 0; i < 2; ++i) {
            full[i] = sample_images(sets[i], map, search.density, search.fiber_levels);
          }
          auto rf = relations({&full[0], &full[1]}, sets);
          if (!all_hold(rf, false)) continue;
          for (int i = 0; i < 2; ++i) {
            twice[i] = sample_images(sets[i], map, dbl, search.fiber_levels);
          }
          const auto rd = relations({&twice[0], &twice[1]}, sets);
          for (std::size_t k = 0; k < rf.size(); ++k) rf[k].at_doubled = rd[k].at_default;
          if (!all_hold(rf, true)) continue;
          result.found = true;
          result.hsets = sets;
          result.relations = rf;
          return result;
        }
      }
    }
  }
  result.hsets = best_sets;
  result.relations = best;
  return result;
}

nlohmann::json fixed_point_json(const FixedPointRecord& fp) {
  nlohmann::json j{{"z", {fp.z.g, fp.z.G}},
                   {"class", to_string(fp.cls)},
                   {"residual", fp.residual},
                   {"jacobian", {{fp.jac[0][0], fp.jac[0][1]}, {fp.jac[1][0], fp.jac[1][1]}}}};
  nlohmann::json lam = nlohmann::json::array();
  for (const auto& l : fp.eigen.values) lam.push_back({l.real(), l.imag()});
  j["eigenvalues"] = lam;
  if (fp.cls == FixedPointClass::hyperbolic) {
    j["lambda_u"] = fp.lambda_unstable;
    j["lambda_s"] = fp.lambda_stable;
    j["v_u"] = {fp.v_unstable.g, fp.v_unstable.G};
    j["v_s"] = {fp.v_stable.g, fp.v_stable.G};
  }
  return j;
}

nlohmann::json horseshoe_certificate(const HorseshoeResult& res, const nlohmann::json& params) {
  nlohmann::json cert;
  cert["found"] = res.found;
  cert["fixed_points"] = nlohmann::json::array();
  cert["eigen_data"] = nlohmann::json::array();
  for (const auto& fp : res.fixed_points) {
    cert["fixed_points"].push_back({{"z", {fp.z.g, fp.z.G}}, {"residual", fp.residual}});
    cert["eigen_data"].push_back(fixed_point_json(fp));
  }
  cert["hsets"] = {res.hsets[0].to_json(), res.hsets[1].to_json()};
  cert["relations"] = nlohmann::json::array();
  auto covering_json = [](const CoveringResult& c) {
    return nlohmann::json{{"verdict", to_string(c.verdict)},
                          {"fiber", c.fiber_ok},
                          {"exit", c.exit_ok},
                          {"entry", c.entry_ok},
                          {"fiber_level", c.fiber_level},
                          {"note", c.note},
                          {"witness_counts",
                           {{"fiber", c.fiber_samples},
                            {"exit_edges", c.exit_samples},
                            {"boundary", c.boundary_samples}}}};
  };
  for (const auto& r : res.relations) {
    cert["relations"].push_back({{"from", r.from},
                                 {"to", r.to},
                                 {"verdict", to_string(r.at_default.verdict)},
                                 {"default", covering_json(r.at_default)},
                                 {"doubled", covering_json(r.at_doubled)}});
  }
  cert["sampling"] = {
      {"default", {{"edge", res.density.edge}, {"fiber", res.density.fiber}}},
      {"doubled", {{"edge", 2 * res.density.edge}, {"fiber", 2 * res.density.fiber}}}};
  cert["search"] = {{"candidates_screened", res.candidates_screened},
                    {"best_partial", res.best_partial}};
  cert["params"] = params;
  return cert;
}

}  // namespace perihelion
