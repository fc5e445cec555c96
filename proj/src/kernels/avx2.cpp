// Compiled with -mavx2 -mfma; only entered after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "perihelion/kernels/quadrature_kernels.hpp"

namespace perihelion::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmin(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_min_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_min_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

InverseDistanceResult inverse_distance_mean(std::span<const double> X, std::span<const double> Y,
                                            std::span<const double> W,
                                            const DistanceCoefficients& c) {
  const std::size_t n = X.size();
  const __m256d r2 = _mm256_set1_pd(c.r2);
  const __m256d ax = _mm256_set1_pd(c.ax);
  const __m256d ay = _mm256_set1_pd(c.ay);
  const __m256d k2 = _mm256_set1_pd(c.k2);
  __m256d acc = _mm256_setzero_pd();
  __m256d dmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(X.data() + i);
    const __m256d y = _mm256_loadu_pd(Y.data() + i);
    const __m256d w = _mm256_loadu_pd(W.data() + i);
    const __m256d sq = _mm256_fmadd_pd(x, x, _mm256_mul_pd(y, y));
    __m256d d = _mm256_fmadd_pd(k2, sq, r2);
    d = _mm256_fmadd_pd(ax, x, d);
    d = _mm256_fmadd_pd(ay, y, d);
    dmin = _mm256_min_pd(dmin, d);
    acc = _mm256_add_pd(acc, _mm256_div_pd(w, _mm256_sqrt_pd(d)));
  }
  double sum = hsum(acc);
  double m = hmin(dmin);
  for (; i < n; ++i) {
    const double d = c.r2 + c.ax * X[i] + c.ay * Y[i] + c.k2 * (X[i] * X[i] + Y[i] * Y[i]);
    m = std::min(m, d);
    sum += W[i] / std::sqrt(d);
  }
  return {n ? sum / static_cast<double>(n) : 0.0, m};
}

void legendre_moments(std::span<const double> rho, std::span<const double> cos_theta,
                      std::span<const double> W, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = rho.size();
  const std::size_t kcount = out.size();
  if (kcount == 0 || n == 0) return;
  std::vector<double> acc(4 * kcount, 0.0);  // four lanes per order
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(rho.data() + i);
    const __m256d c = _mm256_loadu_pd(cos_theta.data() + i);
    const __m256d w = _mm256_loadu_pd(W.data() + i);
    const __m256d cr = _mm256_mul_pd(c, r);
    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d prev = _mm256_set1_pd(1.0);
    __m256d cur = cr;
    auto add = [&](std::size_t k, __m256d v) {
      double* slot = acc.data() + 4 * k;
      _mm256_storeu_pd(slot, _mm256_add_pd(_mm256_loadu_pd(slot), v));
    };
    add(0, w);
    if (kcount > 1) add(1, _mm256_mul_pd(w, cur));
    for (std::size_t k = 1; k + 1 < kcount; ++k) {
      const double kk = static_cast<double>(k);
      const __m256d a = _mm256_set1_pd((2.0 * kk + 1.0) / (kk + 1.0));
      const __m256d b = _mm256_set1_pd(kk / (kk + 1.0));
      const __m256d next =
          _mm256_fmsub_pd(_mm256_mul_pd(a, cr), cur, _mm256_mul_pd(_mm256_mul_pd(b, rr), prev));
      prev = cur;
      cur = next;
      add(k + 1, _mm256_mul_pd(w, cur));
    }
  }
  for (std::size_t k = 0; k < kcount; ++k) out[k] = hsum(_mm256_loadu_pd(acc.data() + 4 * k));
  for (; i < n; ++i) {
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

}  // namespace perihelion::kernels::avx2
