#include <arm_neon.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_detail.hpp"

// NEON (aarch64) variants; same polynomial kernels as the AVX2 file, two
// lanes wide.

namespace oppspec::kernels::detail {
namespace {

constexpr double kLn10Over10 = 0.23025850929940456840179914547;
constexpr double kInvLn2 = 1.4426950408889634073599246810;

inline float64x2_t exp_f64x2(float64x2_t x) {
  x = vminq_f64(x, vdupq_n_f64(708.0));
  x = vmaxq_f64(x, vdupq_n_f64(-708.0));

  const float64x2_t n =
      vrndnq_f64(vmulq_f64(x, vdupq_n_f64(1.4426950408889634073599)));
  float64x2_t r = vfmsq_f64(x, n, vdupq_n_f64(6.93145751953125e-1));
  r = vfmsq_f64(r, n, vdupq_n_f64(1.42860682030941723212e-6));
  const float64x2_t rr = vmulq_f64(r, r);

  float64x2_t p = vdupq_n_f64(1.26177193074810590878e-4);
  p = vfmaq_f64(vdupq_n_f64(3.02994407707441961300e-2), p, rr);
  p = vfmaq_f64(vdupq_n_f64(9.99999999999999999910e-1), p, rr);
  p = vmulq_f64(p, r);

  float64x2_t q = vdupq_n_f64(3.00198505138664455042e-6);
  q = vfmaq_f64(vdupq_n_f64(2.52448340349684104192e-3), q, rr);
  q = vfmaq_f64(vdupq_n_f64(2.27265548208155028766e-1), q, rr);
  q = vfmaq_f64(vdupq_n_f64(2.00000000000000000005e0), q, rr);

  float64x2_t e = vdivq_f64(p, vsubq_f64(q, p));
  e = vfmaq_f64(vdupq_n_f64(1.0), e, vdupq_n_f64(2.0));

  const int64x2_t n64 = vshlq_n_s64(vcvtq_s64_f64(n), 52);
  return vreinterpretq_f64_s64(vaddq_s64(vreinterpretq_s64_f64(e), n64));
}

inline float64x2_t log_f64x2(float64x2_t x) {
  const float64x2_t one = vdupq_n_f64(1.0);

  const int64x2_t bits = vreinterpretq_s64_f64(x);
  const int64x2_t expo =
      vsubq_s64(vshrq_n_s64(bits, 52), vdupq_n_s64(1022));
  float64x2_t e = vcvtq_f64_s64(expo);

  const int64x2_t mant_mask = vdupq_n_s64(0x000FFFFFFFFFFFFFll);
  const int64x2_t half_bits = vdupq_n_s64(0x3FE0000000000000ll);
  const float64x2_t m = vreinterpretq_f64_s64(
      vorrq_s64(vandq_s64(bits, mant_mask), half_bits));

  const uint64x2_t below = vcltq_f64(m, vdupq_n_f64(0.70710678118654752440));
  const float64x2_t z = vbslq_f64(below, vsubq_f64(vaddq_f64(m, m), one),
                                  vsubq_f64(m, one));
  e = vsubq_f64(e, vbslq_f64(below, one, vdupq_n_f64(0.0)));

  const float64x2_t zz = vmulq_f64(z, z);

  float64x2_t p = vdupq_n_f64(1.01875663804580931796e-4);
  p = vfmaq_f64(vdupq_n_f64(4.97494994976747001425e-1), p, z);
  p = vfmaq_f64(vdupq_n_f64(4.70579119878881725854e0), p, z);
  p = vfmaq_f64(vdupq_n_f64(1.44989225341610930846e1), p, z);
  p = vfmaq_f64(vdupq_n_f64(1.79368678507819816313e1), p, z);
  p = vfmaq_f64(vdupq_n_f64(7.70838733755885391666e0), p, z);

  float64x2_t q = vaddq_f64(z, vdupq_n_f64(1.12873587189167450590e1));
  q = vfmaq_f64(vdupq_n_f64(4.52279145837532221105e1), q, z);
  q = vfmaq_f64(vdupq_n_f64(8.29875266912776603211e1), q, z);
  q = vfmaq_f64(vdupq_n_f64(7.11544750618563894466e1), q, z);
  q = vfmaq_f64(vdupq_n_f64(2.31251620126765340583e1), q, z);

  float64x2_t y = vmulq_f64(vmulq_f64(z, zz), vdivq_f64(p, q));
  y = vfmsq_f64(y, e, vdupq_n_f64(2.121944400546905827679e-4));
  y = vfmsq_f64(y, vdupq_n_f64(0.5), zz);
  float64x2_t res = vaddq_f64(z, y);
  res = vfmaq_f64(res, e, vdupq_n_f64(0.693359375));
  return res;
}

inline float64x2_t spectral_efficiency_f64x2(float64x2_t db) {
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t inv_ln2 = vdupq_n_f64(kInvLn2);
  const float64x2_t g = exp_f64x2(vmulq_f64(db, vdupq_n_f64(kLn10Over10)));
  const float64x2_t t = vaddq_f64(one, g);
  const uint64x2_t tiny = vceqq_f64(t, one);
  const float64x2_t logt = vmulq_f64(log_f64x2(t), inv_ln2);
  return vbslq_f64(tiny, vmulq_f64(g, inv_ln2), logt);
}

double sum_squares_neon(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t a = vld1q_f64(x + i);
    const float64x2_t b = vld1q_f64(x + i + 2);
    acc0 = vfmaq_f64(acc0, a, a);
    acc1 = vfmaq_f64(acc1, b, b);
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void weighted_exp_sum_neon(const double* thetas, std::size_t n,
                           const double* coeff, const double* rate,
                           std::size_t k, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t th = vld1q_f64(thetas + j);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const float64x2_t arg = vmulq_f64(vdupq_n_f64(-rate[i]), th);
      acc = vfmaq_f64(acc, vdupq_n_f64(coeff[i]), exp_f64x2(arg));
    }
    vst1q_f64(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      acc += coeff[i] * std::exp(-rate[i] * thetas[j]);
    out[j] = acc;
  }
}

void spectral_efficiency_neon(const double* db, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, spectral_efficiency_f64x2(vld1q_f64(db + i)));
  for (; i < n; ++i)
    out[i] = std::log1p(std::exp(db[i] * kLn10Over10)) * kInvLn2;
}

double spectral_efficiency_wsum_neon(const double* db, const double* w,
                                     std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t se = spectral_efficiency_f64x2(vld1q_f64(db + i));
    acc = vfmaq_f64(acc, vld1q_f64(w + i), se);
  }
  double total = vaddvq_f64(acc);
  for (; i < n; ++i)
    total += w[i] * std::log1p(std::exp(db[i] * kLn10Over10)) * kInvLn2;
  return total;
}

}  // namespace

const KernelOps& neon_impl() {
  static const KernelOps ops{
      "neon",
      sum_squares_neon,
      weighted_exp_sum_neon,
      spectral_efficiency_neon,
      spectral_efficiency_wsum_neon,
  };
  return ops;
}

}  // namespace oppspec::kernels::detail
