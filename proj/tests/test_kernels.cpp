#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oppspec/kernels.hpp"

using namespace oppspec;

namespace {

// scalar vs SIMD agreement: relative to the larger of |ref| and 1
void check_close(double got, double ref, double tol) {
  CHECK(std::abs(got - ref) <= tol * std::max(1.0, std::abs(ref)));
}

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n, double lo,
                               double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

}  // namespace

TEST_CASE("dispatch reports a usable kernel set") {
  CHECK(kernels::active().sum_squares != nullptr);
  CHECK(kernels::scalar().sum_squares != nullptr);
  kernels::force_scalar(true);
  CHECK(std::string(kernels::active().name) == "scalar");
  kernels::force_scalar(false);
}

TEST_CASE("simd variants match the scalar reference") {
  const kernels::KernelOps* simd = kernels::simd_variant();
  if (simd == nullptr) {
    MESSAGE("no SIMD variant on this host; scalar-only");
    return;
  }
  const kernels::KernelOps& ref = kernels::scalar();
  std::mt19937_64 gen(991);

  SUBCASE("sum_squares") {
    for (std::size_t n : {0ul, 1ul, 7ul, 8ul, 1000ul, 100003ul}) {
      const auto v = random_vec(gen, n, -3.0, 3.0);
      check_close(simd->sum_squares(v.data(), n), ref.sum_squares(v.data(), n),
                  1e-12);
    }
  }

  SUBCASE("weighted_exp_sum") {
    const std::vector<double> coeff{0.3, 0.5, 0.2};
    const std::vector<double> rate{0.25, 2.0, 40.0};
    for (std::size_t n : {1ul, 5ul, 64ul, 4097ul}) {
      const auto thetas = random_vec(gen, n, 0.0, 50.0);
      std::vector<double> a(n), b(n);
      simd->weighted_exp_sum(thetas.data(), n, coeff.data(), rate.data(), 3,
                             a.data());
      ref.weighted_exp_sum(thetas.data(), n, coeff.data(), rate.data(), 3,
                           b.data());
      for (std::size_t i = 0; i < n; ++i) check_close(a[i], b[i], 1e-13);
    }
  }

  SUBCASE("spectral_efficiency incl. extreme dB values") {
    auto db = random_vec(gen, 3000, -80.0, 80.0);
    db.insert(db.end(), {-300.0, -120.0, 0.0, 1e-9, 120.0, 250.0});
    std::vector<double> a(db.size()), b(db.size());
    simd->spectral_efficiency(db.data(), db.size(), a.data());
    ref.spectral_efficiency(db.data(), db.size(), b.data());
    for (std::size_t i = 0; i < db.size(); ++i) check_close(a[i], b[i], 1e-12);
  }

  SUBCASE("spectral_efficiency_wsum") {
    for (std::size_t n : {1ul, 64ul, 999ul}) {
      const auto db = random_vec(gen, n, -30.0, 60.0);
      const auto w = random_vec(gen, n, 0.0, 1.0);
      check_close(simd->spectral_efficiency_wsum(db.data(), w.data(), n),
                  ref.spectral_efficiency_wsum(db.data(), w.data(), n), 1e-12);
    }
  }
}

TEST_CASE("scalar kernels agree with direct formulas") {
  const kernels::KernelOps& ops = kernels::scalar();
  const std::vector<double> x{1.0, -2.0, 3.0};
  CHECK(ops.sum_squares(x.data(), 3) == doctest::Approx(14.0).epsilon(1e-14));

  const double coeff[] = {0.5, 0.5};
  const double rate[] = {1.0, 2.0};
  const double theta[] = {0.0, 1.0};
  double out[2];
  ops.weighted_exp_sum(theta, 2, coeff, rate, 2, out);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(out[1] ==
        doctest::Approx(0.5 * std::exp(-1.0) + 0.5 * std::exp(-2.0)).epsilon(1e-14));

  double se;
  const double db20 = 20.0;
  ops.spectral_efficiency(&db20, 1, &se);
  CHECK(se == doctest::Approx(std::log2(101.0)).epsilon(1e-14));
}
