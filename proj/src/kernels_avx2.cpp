#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels_detail.hpp"

// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has checked cpuid, so no illegal instructions leak onto older
// hardware.

namespace oppspec::kernels::detail {
namespace {

constexpr double kLn10Over10 = 0.23025850929940456840179914547;
constexpr double kInvLn2 = 1.4426950408889634073599246810;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

// e^x = 2^n * e^r with r = x - n ln2; e^r from the classic rational
// expansion in r^2. Input clamped to +-708 so the 2^n bit trick never
// leaves the normal range.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  x = _mm256_min_pd(x, _mm256_set1_pd(708.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));

  const __m256d n = _mm256_round_pd(
      _mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000005e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_castsi256_pd(_mm256_add_epi64(_mm256_castpd_si256(e), n64));
}

// Natural log for positive normal doubles: split into mantissa in
// [sqrt(1/2), sqrt(2)) and exponent, then the rational expansion around 1.
inline __m256d log_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i expo_raw = _mm256_srli_epi64(bits, 52);
  __m256i expo = _mm256_sub_epi64(expo_raw, _mm256_set1_epi64x(1022));
  // pick the low dword of each 64-bit lane and widen to double
  const __m256i sh = _mm256_shuffle_epi32(expo, 0x88);
  const __m256i packed = _mm256_permute4x64_epi64(sh, 0x08);
  __m256d e = _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll);
  const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000ll);
  const __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  const __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  const __m256d z = _mm256_blendv_pd(
      _mm256_sub_pd(m, one), _mm256_sub_pd(_mm256_add_pd(m, m), one), below);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, one));

  const __m256d zz = _mm256_mul_pd(z, z);

  __m256d p = _mm256_set1_pd(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(7.70838733755885391666e0));

  __m256d q = _mm256_add_pd(z, _mm256_set1_pd(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, zz), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, y);
  __m256d res = _mm256_add_pd(z, y);
  res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
  return res;
}

// log2(1 + 10^(db/10)); first-order fallback when 1 + g rounds to 1.
inline __m256d spectral_efficiency_pd(__m256d db) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d inv_ln2 = _mm256_set1_pd(kInvLn2);
  const __m256d g = exp_pd(_mm256_mul_pd(db, _mm256_set1_pd(kLn10Over10)));
  const __m256d t = _mm256_add_pd(one, g);
  const __m256d tiny = _mm256_cmp_pd(t, one, _CMP_EQ_OQ);
  const __m256d logt = _mm256_mul_pd(log_pd(t), inv_ln2);
  return _mm256_blendv_pd(logt, _mm256_mul_pd(g, inv_ln2), tiny);
}

double sum_squares_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(x + i);
    const __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void weighted_exp_sum_avx2(const double* thetas, std::size_t n,
                           const double* coeff, const double* rate,
                           std::size_t k, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d th = _mm256_loadu_pd(thetas + j);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < k; ++i) {
      const __m256d arg = _mm256_mul_pd(_mm256_set1_pd(-rate[i]), th);
      acc = _mm256_fmadd_pd(_mm256_set1_pd(coeff[i]), exp_pd(arg), acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      acc += coeff[i] * std::exp(-rate[i] * thetas[j]);
    out[j] = acc;
  }
}

void spectral_efficiency_avx2(const double* db, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, spectral_efficiency_pd(_mm256_loadu_pd(db + i)));
  for (; i < n; ++i)
    out[i] = std::log1p(std::exp(db[i] * kLn10Over10)) * kInvLn2;
}

double spectral_efficiency_wsum_avx2(const double* db, const double* w,
                                     std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d se = spectral_efficiency_pd(_mm256_loadu_pd(db + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), se, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i)
    total += w[i] * std::log1p(std::exp(db[i] * kLn10Over10)) * kInvLn2;
  return total;
}

}  // namespace

const KernelOps& avx2_impl() {
  static const KernelOps ops{
      "avx2",
      sum_squares_avx2,
      weighted_exp_sum_avx2,
      spectral_efficiency_avx2,
      spectral_efficiency_wsum_avx2,
  };
  return ops;
}

}  // namespace oppspec::kernels::detail
