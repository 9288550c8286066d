#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace oppspec::kernels::detail {
namespace {

constexpr double kLn10Over10 = 0.23025850929940456840179914547;
constexpr double kInvLn2 = 1.4426950408889634073599246810;

double sum_squares_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void weighted_exp_sum_scalar(const double* thetas, std::size_t n,
                             const double* coeff, const double* rate,
                             std::size_t k, double* out) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      acc += coeff[i] * std::exp(-rate[i] * thetas[j]);
    out[j] = acc;
  }
}

double spectral_efficiency_one(double db) {
  return std::log1p(std::exp(db * kLn10Over10)) * kInvLn2;
}

void spectral_efficiency_scalar(const double* db, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = spectral_efficiency_one(db[i]);
}

double spectral_efficiency_wsum_scalar(const double* db, const double* w,
                                       std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * spectral_efficiency_one(db[i]);
  return acc;
}

}  // namespace

const KernelOps& scalar_impl() {
  static const KernelOps ops{
      "scalar",
      sum_squares_scalar,
      weighted_exp_sum_scalar,
      spectral_efficiency_scalar,
      spectral_efficiency_wsum_scalar,
  };
  return ops;
}

}  // namespace oppspec::kernels::detail
