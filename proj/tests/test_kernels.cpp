#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "perihelion/kernels/quadrature_kernels.hpp"
#include "perihelion/secular.hpp"

using namespace perihelion;
using namespace perihelion::kernels;

namespace {

struct Nodes {
  std::vector<double> X, Y, W;
};

Nodes random_nodes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.1, 2.0);
  Nodes d;
  for (std::size_t i = 0; i < n; ++i) {
    d.X.push_back(u(rng));
    d.Y.push_back(u(rng));
    d.W.push_back(w(rng));
  }
  return d;
}

}  // namespace

TEST_CASE("scalar reference kernels") {
  const auto& k = kernels_for(SimdLevel::scalar);
  std::vector<double> X{0.5, -0.2, 0.1}, Y{0.0, 0.3, -0.4}, W{1.0, 0.5, 2.0};
  DistanceCoefficients c{4.0, 0.3, -0.1, 0.25};
  const auto r = k.inverse_distance_mean(X, Y, W, c);
  double sum = 0.0, mind = 1e300;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = c.r2 + c.ax * X[i] + c.ay * Y[i] + c.k2 * (X[i] * X[i] + Y[i] * Y[i]);
    sum += W[i] / std::sqrt(d);
    mind = std::min(mind, d);
  }
  CHECK(r.mean == doctest::Approx(sum / 3.0).epsilon(1e-15));
  CHECK(r.min_denominator == doctest::Approx(mind));

  std::vector<double> rho{0.5, 1.2, 0.9}, ct{0.3, -0.7, 0.95}, out(6);
  k.legendre_moments(rho, ct, W, out);
  for (unsigned j = 0; j < out.size(); ++j) {
    double ref = 0.0;
    for (std::size_t i = 0; i < 3; ++i) ref += W[i] * std::pow(rho[i], j) * std::legendre(j, ct[i]);
    CHECK(out[j] == doctest::Approx(ref / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  if (!avx2_supported()) {
    MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
    CHECK_THROWS(kernels_for(SimdLevel::avx2));
    return;
  }
  const auto& s = kernels_for(SimdLevel::scalar);
  const auto& v = kernels_for(SimdLevel::avx2);
  std::mt19937_64 rng(5);
  // lengths that exercise the vector body and every tail length
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 63u, 64u, 1024u, 1027u}) {
    const auto d = random_nodes(n, rng);
    DistanceCoefficients c{9.0, 0.7, -0.4, 1.1};
    const auto a = s.inverse_distance_mean(d.X, d.Y, d.W, c);
    const auto b = v.inverse_distance_mean(d.X, d.Y, d.W, c);
    CHECK(b.mean == doctest::Approx(a.mean).epsilon(1e-14));
    CHECK(b.min_denominator == doctest::Approx(a.min_denominator).epsilon(1e-15));

    std::vector<double> rho, ct;
    for (std::size_t i = 0; i < n; ++i) {
      rho.push_back(0.5 + 0.5 * std::abs(d.X[i]));
      ct.push_back(d.Y[i]);
    }
    std::vector<double> os(12), ov(12);
    s.legendre_moments(rho, ct, d.W, os);
    v.legendre_moments(rho, ct, d.W, ov);
    for (std::size_t j = 0; j < os.size(); ++j) CHECK(ov[j] == doctest::Approx(os[j]).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("averaged potential is independent of the kernel choice") {
  if (!avx2_supported()) return;
  const EllipseNodes nodes(1.0, 0.4, 2048);
  const auto& s = kernels_for(SimdLevel::scalar);
  const auto& v = kernels_for(SimdLevel::avx2);
  DistanceCoefficients c{100.0, 2.0 * 10.0 * std::cos(0.3), -2.0 * 10.0 * std::sin(0.3), 1.0};
  const auto a = s.inverse_distance_mean(nodes.X(), nodes.Y(), nodes.W(), c);
  const auto b = v.inverse_distance_mean(nodes.X(), nodes.Y(), nodes.W(), c);
  CHECK(b.mean == doctest::Approx(a.mean).epsilon(1e-15));
}
