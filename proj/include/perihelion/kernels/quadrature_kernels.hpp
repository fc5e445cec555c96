#pragma once

// Inner loops of the l-averages: one pass over the quadrature nodes of the
// inner ellipse. Each kernel has a scalar reference implementation and, on
// x86-64, an AVX2/FMA variant chosen at runtime. The variants must agree to
// rounding (tests/test_kernels.cpp).

#include <span>
#include <string_view>

namespace perihelion::kernels {

enum class SimdLevel { scalar, avx2 };

std::string_view to_string(SimdLevel level);

/// Coefficients of d_i = r2 + ax X_i + ay Y_i + k2 (X_i^2 + Y_i^2).
struct DistanceCoefficients {
  double r2 = 1.0;
  double ax = 0.0;
  double ay = 0.0;
  double k2 = 0.0;
};

struct InverseDistanceResult {
  double mean = 0.0;            ///< (1/n) sum W_i / sqrt(d_i)
  double min_denominator = 0.0; ///< min_i d_i (squared distance)
};

using InverseDistanceFn = InverseDistanceResult (*)(std::span<const double> X,
                                                    std::span<const double> Y,
                                                    std::span<const double> W,
                                                    const DistanceCoefficients& c);

/// out[k] = (1/n) sum_i W_i rho_i^k P_k(c_i), k = 0..out.size()-1, with the
/// Legendre polynomials from the upward three-term recurrence.
using LegendreMomentsFn = void (*)(std::span<const double> rho, std::span<const double> cos_theta,
                                   std::span<const double> W, std::span<double> out);

struct KernelTable {
  SimdLevel level = SimdLevel::scalar;
  InverseDistanceFn inverse_distance_mean = nullptr;
  LegendreMomentsFn legendre_moments = nullptr;
};

bool avx2_supported();

/// Table for an explicit level; throws std::invalid_argument when the level
/// is not compiled in or not supported by this CPU.
const KernelTable& kernels_for(SimdLevel level);

/// Best available table. PERIHELION_SIMD=scalar in the environment forces the
/// reference path.
const KernelTable& active_kernels();

namespace scalar {
InverseDistanceResult inverse_distance_mean(std::span<const double> X, std::span<const double> Y,
                                            std::span<const double> W,
                                            const DistanceCoefficients& c);
void legendre_moments(std::span<const double> rho, std::span<const double> cos_theta,
                      std::span<const double> W, std::span<double> out);
}  // namespace scalar

#if defined(PERIHELION_HAVE_AVX2)
namespace avx2 {
InverseDistanceResult inverse_distance_mean(std::span<const double> X, std::span<const double> Y,
                                            std::span<const double> W,
                                            const DistanceCoefficients& c);
void legendre_moments(std::span<const double> rho, std::span<const double> cos_theta,
                      std::span<const double> W, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace perihelion::kernels
