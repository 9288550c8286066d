#pragma once

#include <cstddef>

namespace oppspec::kernels {

/// Data-parallel inner loops used by the Monte Carlo and fitting paths.
///
/// Each entry has a scalar reference implementation and, where the host CPU
/// supports it, a SIMD variant selected once at runtime. The variants are
/// equivalence-tested against each other; callers never need to care which
/// one is active.
struct KernelOps {
  const char* name;

  /// sum(x[i]^2)
  double (*sum_squares)(const double* x, std::size_t n);

  /// out[j] = sum_i coeff[i] * exp(-rate[i] * theta[j]); thetas must be >= 0.
  void (*weighted_exp_sum)(const double* thetas, std::size_t n,
                           const double* coeff, const double* rate,
                           std::size_t k, double* out);

  /// out[i] = log2(1 + 10^(db[i]/10))
  void (*spectral_efficiency)(const double* db, std::size_t n, double* out);

  /// sum_i w[i] * log2(1 + 10^(db[i]/10))
  double (*spectral_efficiency_wsum)(const double* db, const double* w,
                                     std::size_t n);

};

/// Kernels selected for this process (SIMD when available, else scalar).
const KernelOps& active();

/// Scalar reference implementations.
const KernelOps& scalar();

/// SIMD variant compiled into this binary and usable on this CPU, or nullptr.
const KernelOps* simd_variant();

/// Force the scalar path regardless of CPU support (test hook).
void force_scalar(bool on);

}  // namespace oppspec::kernels
