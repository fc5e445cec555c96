#include <cmath>

#include "doctest.h"
#include "perihelion/angles.hpp"
#include "perihelion/chaos.hpp"
#include "perihelion/errors.hpp"

using namespace perihelion;

namespace {

/// Logistic stretch in g, contraction in G: saddles at g = 0 and g = 5/6.
MapView folded_map() {
  return {[](SectionPoint z) { return SectionPoint{6.0 * z.g * (1.0 - z.g), 0.1 * z.G}; }, 0.0};
}

MapView rotation_map(SectionPoint c, double angle) {
  return {[=](SectionPoint z) {
            const double dx = z.g - c.g, dy = z.G - c.G;
            return SectionPoint{c.g + std::cos(angle) * dx - std::sin(angle) * dy,
                                c.G + std::sin(angle) * dx + std::cos(angle) * dy};
          },
          0.0};
}

}  // namespace

TEST_CASE("chart difference on the cylinder") {
  const auto d = chart_difference({0.1, 0.2}, {3.0, 0.1}, kPi);
  CHECK(d.g == doctest::Approx(0.1 - 3.0 + kPi));
  CHECK(d.G == doctest::Approx(0.1));
  CHECK(chart_distance({0.1, 0.0}, {0.1 + kPi, 0.0}, kPi) == doctest::Approx(0.0).scale(1.0));
  CHECK(chart_distance({0.1, 0.0}, {0.1 + kPi, 0.0}, 0.0) == doctest::Approx(kPi));
}

TEST_CASE("jacobian of a linear map is exact") {
  const Mat2 A{{{2.0, 0.5}, {-0.3, 0.7}}};
  MapView lin{[&](SectionPoint z) {
                return SectionPoint{A[0][0] * z.g + A[0][1] * z.G, A[1][0] * z.g + A[1][1] * z.G};
              },
              0.0};
  const auto J = jacobian(lin, {0.4, -1.2});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(J[i][j] == doctest::Approx(A[i][j]).epsilon(1e-10));
}

TEST_CASE("eigen decomposition") {
  const auto e = eigen2({{{3.0, 1.0}, {0.0, 1.0 / 3.0}}});
  REQUIRE(e.real);
  CHECK(e.values[0].real() == doctest::Approx(3.0));
  CHECK(e.values[1].real() == doctest::Approx(1.0 / 3.0));
  const auto r = eigen2({{{0.0, -1.0}, {1.0, 0.0}}});
  CHECK(!r.real);
  CHECK(std::abs(r.values[0]) == doctest::Approx(1.0));
}

TEST_CASE("rotation has an elliptic point and no hyperbolic roots") {
  const auto f = rotation_map({0.5, 0.2}, 0.7);
  const auto census = newton_fixed_points(f, seed_grid(0.0, 1.0, 4, -0.5, 0.5, 4));
  CHECK(census.count(FixedPointClass::hyperbolic) == 0);
  REQUIRE(census.points.size() == 1);
  CHECK(census.points[0].cls == FixedPointClass::elliptic);
  CHECK(census.points[0].z.g == doctest::Approx(0.5));
  CHECK(census.points[0].z.G == doctest::Approx(0.2));
}

TEST_CASE("folded map: saddles and the four coverings") {
  const auto f = folded_map();
  const auto census = newton_fixed_points(f, seed_grid(-0.1, 0.95, 6, -0.1, 0.1, 3));
  REQUIRE(census.count(FixedPointClass::hyperbolic) == 2);
  FixedPointRecord p1 = census.points[0], p2 = census.points[1];
  if (p1.z.g > p2.z.g) std::swap(p1, p2);
  CHECK(p1.z.g == doctest::Approx(0.0).scale(1.0));
  CHECK(p2.z.g == doctest::Approx(5.0 / 6.0));
  CHECK(p1.lambda_unstable == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(p2.lambda_unstable == doctest::Approx(-4.0).epsilon(1e-6));
  CHECK(p1.lambda_stable == doctest::Approx(0.1).epsilon(1e-6));

  HorseshoeSearch search;
  search.A_grid = {0.1};
  search.B_grid = {0.25};
  search.density = {128, 256};
  const auto res = detect_horseshoe(p1, p2, f, search);
  CHECK(res.found);
  REQUIRE(res.relations.size() == 4);
  for (const auto& r : res.relations) {
    CHECK(r.at_default.verdict == Verdict::holds);
    CHECK(r.at_doubled.verdict == Verdict::holds);
  }
  const auto cert = horseshoe_certificate(res, {{"case", "folded"}});
  CHECK(cert["found"].get<bool>());
  CHECK(cert["relations"].size() == 4);

  // A box too narrow to reach the other saddle covers only itself.
  const auto small = make_hset(p1, 0.1, 0.05, 0.0);
  const auto img = sample_images(small, f, {64, 128}, {0.0});
  CHECK(check_covering(img, small).verdict == Verdict::holds);
  CHECK(check_covering(img, make_hset(p2, 0.1, 0.25, 0.0)).verdict == Verdict::fails);
}

TEST_CASE("the identity does not cover") {
  FixedPointRecord fp;
  fp.z = {0.0, 0.0};
  fp.cls = FixedPointClass::hyperbolic;
  fp.v_unstable = {1.0, 0.0};
  fp.v_stable = {0.0, 1.0};
  const auto N = make_hset(fp, 0.1, 0.1, 0.0);
  MapView id{[](SectionPoint z) { return z; }, 0.0};
  const auto img = sample_images(N, id, {64, 128}, {0.0});
  CHECK(check_covering(img, N).verdict == Verdict::fails);
}

TEST_CASE("h-sets need a hyperbolic point") {
  const auto fp = classify_fixed_point(rotation_map({0.0, 0.0}, 0.5), {0.0, 0.0});
  CHECK(fp.cls == FixedPointClass::elliptic);
  CHECK_THROWS_AS(make_hset(fp, 0.1, 0.1, 0.0), DomainError);
  CHECK_THROWS_AS(detect_horseshoe(fp, fp, rotation_map({0.0, 0.0}, 0.5)), DomainError);
}

TEST_CASE("h-set chart") {
  FixedPointRecord fp;
  fp.z = {1.0, 0.2};
  fp.cls = FixedPointClass::hyperbolic;
  fp.v_unstable = {0.6, 0.8};
  fp.v_stable = {1.0, 0.0};
  const auto N = make_hset(fp, 0.3, 0.1, kPi);
  const auto x = N.point(0.4, -0.7);
  const auto c = N.coords({x.g + kPi, x.G});
  CHECK(c[0] == doctest::Approx(0.4));
  CHECK(c[1] == doctest::Approx(-0.7));
}

TEST_CASE("manifolds of a linear saddle lie on the eigen-lines") {
  const double lam = 3.0;
  MapView f{[=](SectionPoint z) { return SectionPoint{lam * z.g, z.G / lam}; }, 0.0};
  MapView fi{[=](SectionPoint z) { return SectionPoint{z.g / lam, lam * z.G}; }, 0.0};
  const auto fp = classify_fixed_point(f, {0.0, 0.0});
  REQUIRE(fp.cls == FixedPointClass::hyperbolic);
  ManifoldOptions mo;
  mo.iterations = 3;
  const auto wu = grow_manifold(fp, ManifoldKind::unstable, f, fi, mo);
  const auto ws = grow_manifold(fp, ManifoldKind::stable, f, fi, mo);
  for (const auto& br : wu.branches) {
    REQUIRE(br.points.size() > 2);
    for (const auto& p : br.points) CHECK(std::abs(p.G) < 1e-12);
  }
  for (const auto& br : ws.branches)
    for (const auto& p : br.points) CHECK(std::abs(p.g) < 1e-12);
  CHECK(polyline_distance(wu.branches[0].points, ws.branches[0].points, 0.0) < 1e-4);
}

TEST_CASE("section lift and projection") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 12);
  SecularSystem sys(table, 24.394);
  const auto pivot = default_pivot();
  const auto plane = SectionPlane::from_pivot(sys, pivot);
  CHECK(plane.c == doctest::Approx(sys.energy(pivot)).epsilon(1e-15));
  const auto z0 = project(pivot);
  const auto back = lift(z0, plane, sys);
  for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(pivot[i]).epsilon(1e-10));
  for (SectionPoint z : {SectionPoint{0.19, 0.68}, SectionPoint{0.27, 0.73}, SectionPoint{3.0, -0.2}}) {
    const auto x = lift(z, plane, sys);
    const double scale = std::abs(plane.v_r) * x[2];
    CHECK(std::abs(plane.value(x, plane.branch(x[3]))) <= 1e-12 * scale);
    CHECK(std::abs(sys.energy(x) - plane.c) <= 1e-11 * std::abs(plane.c));
    const auto p = project(x);
    CHECK(chart_distance(p, z, kPi) < 1e-12);
    CHECK(x[0] < 0.0);
  }
}

TEST_CASE("section map is area preserving and invertible") {
  const auto table = CoeffTable::build(mass_params_from_betas(80.0, 80.0), 20);
  SecularSystem sys(table, 24.394);
  PoincareMap P(sys, SectionPlane::from_pivot(sys, default_pivot()));
  const SectionPoint z{0.2, 0.7};
  const auto fwd = P.forward_detail(z);
  CHECK(fwd.tau > 0.0);
  CHECK(fwd.transversality > 0.5);
  const auto zb = P.inverse(fwd.z);
  CHECK(chart_distance(zb, z, kPi) < 1e-8);
  const auto J = jacobian(P.view(), z);
  CHECK(J[0][0] * J[1][1] - J[0][1] * J[1][0] == doctest::Approx(1.0).epsilon(1e-5));
}
