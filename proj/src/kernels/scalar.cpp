#include <algorithm>
#include <cmath>
#include <limits>

#include "perihelion/kernels/quadrature_kernels.hpp"

namespace perihelion::kernels::scalar {

InverseDistanceResult inverse_distance_mean(std::span<const double> X, std::span<const double> Y,
                                            std::span<const double> W,
                                            const DistanceCoefficients& c) {
  const std::size_t n = X.size();
  double sum = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = c.r2 + c.ax * X[i] + c.ay * Y[i] + c.k2 * (X[i] * X[i] + Y[i] * Y[i]);
    dmin = std::min(dmin, d);
    sum += W[i] / std::sqrt(d);
  }
  return {n ? sum / static_cast<double>(n) : 0.0, dmin};
}

void legendre_moments(std::span<const double> rho, std::span<const double> cos_theta,
                      std::span<const double> W, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = rho.size();
  const std::size_t kcount = out.size();
  if (kcount == 0 || n == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    // T_k = rho^k P_k(c); T_{k+1} = ((2k+1) c rho T_k - k rho^2 T_{k-1}) / (k+1)
    const double r = rho[i];
    const double c = cos_theta[i];
    double prev = 1.0;
    double cur = r * c;
    out[0] += W[i];
    if (kcount > 1) out[1] += W[i] * cur;
    for (std::size_t k = 1; k + 1 < kcount; ++k) {
      const double kk = static_cast<double>(k);
      const double next = ((2.0 * kk + 1.0) * c * r * cur - kk * r * r * prev) / (kk + 1.0);
      prev = cur;
      cur = next;
      out[k + 1] += W[i] * cur;
    }
  }
  for (auto& v : out) v /= static_cast<double>(n);
}

}  // namespace perihelion::kernels::scalar
