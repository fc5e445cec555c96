#include <cstdlib>
#include <stdexcept>
#include <string>

#include "perihelion/kernels/quadrature_kernels.hpp"

namespace perihelion::kernels {

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::scalar: return "scalar";
    case SimdLevel::avx2: return "avx2";
  }
  return "unknown";
}

bool avx2_supported() {
#if defined(PERIHELION_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable kScalarTable{SimdLevel::scalar, &scalar::inverse_distance_mean,
                               &scalar::legendre_moments};
#if defined(PERIHELION_HAVE_AVX2)
const KernelTable kAvx2Table{SimdLevel::avx2, &avx2::inverse_distance_mean,
                             &avx2::legendre_moments};
#endif

const KernelTable& select_best() {
  if (const char* forced = std::getenv("PERIHELION_SIMD")) {
    if (std::string(forced) == "scalar") return kScalarTable;
  }
#if defined(PERIHELION_HAVE_AVX2)
  if (avx2_supported()) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace

const KernelTable& kernels_for(SimdLevel level) {
  if (level == SimdLevel::scalar) return kScalarTable;
#if defined(PERIHELION_HAVE_AVX2)
  if (level == SimdLevel::avx2 && avx2_supported()) return kAvx2Table;
#endif
  throw std::invalid_argument("kernels_for: level " + std::string(to_string(level)) +
                              " unavailable on this build/CPU");
}

const KernelTable& active_kernels() {
  static const KernelTable& table = select_best();
  return table;
}

}  // namespace perihelion::kernels
