#pragma once

// Poincare map of the secular flow on a plane section, fixed points and
// their linearisation, invariant manifolds, h-sets and covering relations.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "perihelion/flow.hpp"

namespace perihelion {

/// A point of the section chart, ordered (g, G).
struct SectionPoint {
  double g = 0.0;
  double G = 0.0;
};

/// A planar map together with the period of its first coordinate (0 when the
/// chart is not periodic). The secular section uses period pi in g.
struct MapView {
  std::function<SectionPoint(SectionPoint)> f;
  double g_period = 0.0;
};

/// a - b with the g difference reduced to [-period/2, period/2).
SectionPoint chart_difference(SectionPoint a, SectionPoint b, double g_period);
double chart_distance(SectionPoint a, SectionPoint b, double g_period);

// ---------------------------------------------------------------------------
// Section, lift, projection

struct SectionPlane {
  double R_star = 0.0;
  double r_star = 0.0;
  double G_star = 0.0;
  double g_star = 0.0;
  double v_r = 0.0;  ///< V* = (dr/dt, dG/dt, dg/dt) at the pivot
  double v_G = 0.0;
  double v_g = 0.0;
  double c = 0.0;        ///< energy level
  double R_sign = -1.0;  ///< branch of the energetic lift
  double orientation = 1.0;  ///< required sign of V* . (dr, dG, dg)/dt at crossings

  /// Builds the section through a full pivot state; V* comes from the field
  /// and c = H(pivot). R_sign follows sign(R*).
  static SectionPlane from_pivot(const SecularSystem& sys, const State<4>& pivot);

  /// Plane function with the g offset taken on branch k:
  /// v_r (r - r*) + v_G (G - G*) + v_g (g - g* - k pi).
  double value(const State<4>& x, int k) const;
  /// Branch of g nearest to g*: round((g - g*) / pi).
  int branch(double g) const;
  nlohmann::json to_json() const;
};

/// Default section of the binary-asteroid example: R* = -0.0060, G* = -0.804,
/// r* = 652.256, g* = 1.4524.
State<4> default_pivot();

/// (g, G) -> (R, G, r, g): planarity fixes r, energy fixes |R|. Throws
/// LiftError when the energetic discriminant is negative.
State<4> lift(SectionPoint z, const SectionPlane& plane, const SecularSystem& sys);
/// (R, G, r, g) -> (g mod pi, G).
SectionPoint project(const State<4>& x);

struct PoincareOptions {
  IntegratorOptions integrator{1e-12, 1e-12};
  double t_max = 2.0e6;          ///< return-time horizon
  double min_return_time = 1.0;  ///< ignores the departure from the plane itself
  double transversality = 1e-9;  ///< minimum |V*.f| / (|V*| |f|) at the crossing
};

struct ReturnResult {
  SectionPoint z;
  double tau = 0.0;  ///< signed flight time
  State<4> state{};
  double transversality = 0.0;
};

/// P(z) = project(flow to the next same-orientation crossing of lift(z)).
/// The inverse integrates backwards in time. Pure; safe to call concurrently.
class PoincareMap {
 public:
  PoincareMap(const SecularSystem& sys, SectionPlane plane, PoincareOptions opts = {});

  ReturnResult forward_detail(SectionPoint z) const;
  ReturnResult backward_detail(SectionPoint z) const;
  SectionPoint operator()(SectionPoint z) const { return forward_detail(z).z; }
  SectionPoint inverse(SectionPoint z) const { return backward_detail(z).z; }

  MapView view() const;
  MapView inverse_view() const;
  const SectionPlane& plane() const { return plane_; }
  const SecularSystem& system() const { return sys_; }

 private:
  ReturnResult run(SectionPoint z, double direction) const;

  const SecularSystem& sys_;
  SectionPlane plane_;
  PoincareOptions opts_;
};

// ---------------------------------------------------------------------------
// Linearisation and fixed points

using Mat2 = std::array<std::array<double, 2>, 2>;  ///< rows/cols ordered (g, G)

struct JacobianOptions {
  double step = 1e-4;
  bool richardson = true;
};

/// Central differences (one Richardson extrapolation by default).
Mat2 jacobian(const MapView& map, SectionPoint z, const JacobianOptions& opts = {});

struct Eigen2 {
  bool real = true;
  std::array<std::complex<double>, 2> values{};  ///< |values[0]| >= |values[1]| when real
  std::array<SectionPoint, 2> vectors{};         ///< unit eigenvectors (real case)
};
Eigen2 eigen2(const Mat2& m);

enum class FixedPointClass { hyperbolic, elliptic, other };
const char* to_string(FixedPointClass c);

struct FixedPointRecord {
  SectionPoint z;
  Mat2 jac{};
  Eigen2 eigen;
  FixedPointClass cls = FixedPointClass::other;
  double residual = 0.0;  ///< |P(z) - z|
  SectionPoint v_unstable;
  SectionPoint v_stable;
  double lambda_unstable = 0.0;
  double lambda_stable = 0.0;
};

FixedPointRecord classify_fixed_point(const MapView& map, SectionPoint z,
                                      const JacobianOptions& opts = {});

struct NewtonOptions {
  int max_iterations = 30;
  double tolerance = 1e-11;   ///< on |P(z) - z|, stops the iteration
  double accept_residual = 1e-9;  ///< best residual needed to keep the root
  double dedup_distance = 1e-6;
  double max_step = 0.05;     ///< cap on one Newton update
  JacobianOptions newton_jacobian{1e-5, false};
  JacobianOptions final_jacobian{1e-4, true};
};

/// Newton on P(z) - z from one seed; nullopt when it does not converge or the
/// map fails along the way.
std::optional<SectionPoint> newton_solve(const MapView& map, SectionPoint seed,
                                         const NewtonOptions& opts = {});

struct FixedPointCensus {
  std::vector<FixedPointRecord> points;
  std::size_t seeds = 0;
  std::size_t converged = 0;
  std::size_t dropped = 0;
  std::size_t count(FixedPointClass c) const;
};

/// Runs Newton from every seed (in parallel), deduplicates, classifies.
FixedPointCensus newton_fixed_points(const MapView& map, const std::vector<SectionPoint>& seeds,
                                     const NewtonOptions& opts = {});

std::vector<SectionPoint> seed_grid(double g0, double g1, std::size_t ng, double G0, double G1,
                                    std::size_t nG);

// ---------------------------------------------------------------------------
// Invariant manifolds

enum class ManifoldKind { stable, unstable };

struct ManifoldOptions {
  double delta0 = 1e-5;          ///< distance of the fundamental domain from the point
  std::size_t iterations = 4;    ///< images of the fundamental domain
  std::size_t initial_points = 16;
  double max_spacing = 2e-3;     ///< chart distance between neighbours
  double max_turn = 0.3;         ///< radians between consecutive segments
  std::size_t max_points = 3000; ///< per branch
  double arc_budget = 2.0;       ///< per branch, chart length
};

struct ManifoldBranch {
  int sign = 1;
  std::vector<SectionPoint> points;  ///< g unwrapped along the branch
  std::vector<std::size_t> level;    ///< image index of each point
  bool truncated = false;
};

struct Manifold {
  ManifoldKind kind = ManifoldKind::unstable;
  SectionPoint fixed_point;
  std::array<ManifoldBranch, 2> branches;
};

/// Unstable: fundamental domain along v_u iterated by `forward`. Stable: along
/// v_s iterated by `inverse`. Points are inserted where the images spread out.
Manifold grow_manifold(const FixedPointRecord& fp, ManifoldKind kind, const MapView& forward,
                       const MapView& inverse, const ManifoldOptions& opts = {});

/// Smallest chart distance between two polylines (vertex to segment).
double polyline_distance(const std::vector<SectionPoint>& a, const std::vector<SectionPoint>& b,
                         double g_period);

// ---------------------------------------------------------------------------
// h-sets and covering relations

/// N = q + B [-1,1] v_u + A [-1,1] v_s; c_N(x) = (u, s).
struct HSet {
  SectionPoint q;
  SectionPoint vs;
  SectionPoint vu;
  double A = 0.0;  ///< half-width along v_s (entry direction)
  double B = 0.0;  ///< half-width along v_u (exit direction)
  double g_period = 0.0;

  SectionPoint point(double u, double s) const;
  /// (u, s) of x, with g taken nearest to q when periodic.
  std::array<double, 2> coords(SectionPoint x) const;
  nlohmann::json to_json() const;
};

HSet make_hset(const FixedPointRecord& fp, double A, double B, double g_period);

struct SamplingDensity {
  std::size_t edge = 512;    ///< points per edge of the boundary
  std::size_t fiber = 1024;  ///< points per horizontal fiber
};

/// Images of the sampled pieces of one h-set; computed once, reused for
/// every target set.
struct HSetImages {
  HSet set;
  SamplingDensity density;
  std::vector<double> fiber_levels;                  ///< s = q0 of each fiber
  std::vector<std::vector<SectionPoint>> fibers;     ///< f(c^-1([-1,1] x {q0}))
  std::array<std::vector<SectionPoint>, 2> exits;    ///< f of u = -1 and u = +1 edges
  std::vector<SectionPoint> boundary;                ///< f(boundary), closed loop
  bool failed = false;
  std::string failure;
  std::size_t evaluations = 0;
};

HSetImages sample_images(const HSet& set, const MapView& map, const SamplingDensity& density,
                         const std::vector<double>& fiber_levels);

enum class Verdict { holds, fails, inconclusive };
const char* to_string(Verdict v);

struct CoveringResult {
  Verdict verdict = Verdict::inconclusive;
  bool fiber_ok = false;     ///< condition (1), a fiber image crosses N side to side
  bool exit_ok = false;      ///< condition (2), f(M-) misses N
  bool entry_ok = false;     ///< condition (3), f(M) misses N+
  double fiber_level = 0.0;  ///< q0 that worked
  std::size_t fiber_samples = 0;
  std::size_t exit_samples = 0;
  std::size_t boundary_samples = 0;
  std::string note;
};

/// M f-covers N, judged on the cached images of M in the chart of N.
CoveringResult check_covering(const HSetImages& images_of_M, const HSet& N);

struct HorseshoeSearch {
  std::vector<double> A_grid{0.04, 0.05};
  std::vector<double> B_grid{0.007, 0.008};
  std::vector<double> fiber_levels{0.0, -0.5, 0.5};
  SamplingDensity screen{48, 96};
  SamplingDensity density{512, 1024};
  std::size_t max_verified = 8;  ///< screen-passing candidates to verify in full
};

struct RelationRecord {
  int from = 0;
  int to = 0;
  CoveringResult at_default;
  CoveringResult at_doubled;
};

struct HorseshoeResult {
  bool found = false;
  std::array<FixedPointRecord, 2> fixed_points;
  std::array<HSet, 2> hsets;
  std::vector<RelationRecord> relations;  ///< 1=>1, 1=>2, 2=>1, 2=>2
  std::size_t candidates_screened = 0;
  std::size_t best_partial = 0;  ///< most relations holding at screen density
  SamplingDensity density;
};

/// Grid search over (A1, B1, A2, B2). Throws DomainError unless both points
/// are hyperbolic.
HorseshoeResult detect_horseshoe(const FixedPointRecord& fp1, const FixedPointRecord& fp2,
                                 const MapView& map, const HorseshoeSearch& search = {});

nlohmann::json fixed_point_json(const FixedPointRecord& fp);
nlohmann::json horseshoe_certificate(const HorseshoeResult& res, const nlohmann::json& params);

}  // namespace perihelion
