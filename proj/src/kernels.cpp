#include "oppspec/kernels.hpp"

#include <atomic>

#include "kernels_detail.hpp"

namespace oppspec::kernels {

namespace {
std::atomic<bool> g_force_scalar{false};
}

const KernelOps& scalar() { return detail::scalar_impl(); }

const KernelOps* simd_variant() {
  static const KernelOps* variant = []() -> const KernelOps* {
#if defined(OPPSPEC_KERNELS_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
      return &detail::avx2_impl();
#elif defined(OPPSPEC_KERNELS_NEON)
    return &detail::neon_impl();
#endif
    return nullptr;
  }();
  return variant;
}

void force_scalar(bool on) { g_force_scalar.store(on); }

const KernelOps& active() {
  if (g_force_scalar.load()) return scalar();
  const KernelOps* v = simd_variant();
  return v ? *v : scalar();
}

}  // namespace oppspec::kernels
