#include "oppspec/mathutil.hpp"

#include <cmath>
#include <cstddef>

#include "oppspec/errors.hpp"
#include "oppspec/kernels.hpp"

namespace oppspec {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872421;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993;

double gaussian_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Rational initial estimate for the standard normal quantile (Acklam).
double normal_quantile_estimate(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double gaussian_q(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double gaussian_q_inv(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("gaussian_q_inv: argument must lie in (0, 1)");
  const bool flip = p > 0.5;
  const double pp = flip ? 1.0 - p : p;  // pp in (0, 0.5]

  // Q^-1(pp) = -Phi^-1(pp) >= 0
  double x = -normal_quantile_estimate(pp);
  double lo = 0.0, hi = 42.0;
  for (int iter = 0; iter < 4; ++iter) {
    const double f = gaussian_q(x) - pp;
    if (f == 0.0) break;
    if (f > 0.0)
      lo = x;  // Q decreasing: Q(x) > pp means x below the root
    else
      hi = x;
    const double phi = gaussian_pdf(x);
    if (phi <= 0.0) break;
    const double t = f / phi;
    const double denom = 1.0 - 0.5 * x * t;
    double cand = x + (denom > 0.5 ? t / denom : t);
    if (cand == x) break;  // converged to machine resolution
    if (!(cand >= lo && cand <= hi)) cand = 0.5 * (lo + hi);  // safeguard
    if (cand == x) break;
    x = cand;
  }
  return flip ? -x : x;
}

namespace {

GaussHermite compute_gauss_hermite(int n) {
  GaussHermite gh;
  gh.nodes.assign(n, 0.0);
  gh.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  const double pi_m4 = 0.7511255444649424828587030047;  // pi^(-1/4)
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * gh.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * gh.nodes[1];
    } else {
      z = 2.0 * z - gh.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pi_m4;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    gh.nodes[i] = z;
    gh.nodes[n - 1 - i] = -z;
    gh.weights[i] = 2.0 / (pp * pp);
    gh.weights[n - 1 - i] = gh.weights[i];
  }
  return gh;
}

}  // namespace

const GaussHermite& gauss_hermite_64() {
  static const GaussHermite gh = compute_gauss_hermite(64);
  return gh;
}

double gamma_draw(double shape, Rng& rng) {
  if (!(shape >= 1.0))
    throw DomainError("gamma_draw: shape must be at least 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.gaussian();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double expected_spectral_efficiency(double mean_db, double sigma_db) {
  constexpr double kLn10Over10 = 0.23025850929940456840179914547;
  constexpr double kInvLn2 = 1.4426950408889634073599246810;
  if (sigma_db == 0.0)
    return std::log1p(std::exp(mean_db * kLn10Over10)) * kInvLn2;
  const GaussHermite& gh = gauss_hermite_64();
  const std::size_t n = gh.nodes.size();
  std::vector<double> db(n), w(n);
  const double inv_sqrt_pi = 0.56418958354775628694807945156;
  for (std::size_t i = 0; i < n; ++i) {
    db[i] = mean_db + kSqrt2 * sigma_db * gh.nodes[i];
    w[i] = gh.weights[i] * inv_sqrt_pi;
  }
  return kernels::active().spectral_efficiency_wsum(db.data(), w.data(), n);
}

}  // namespace oppspec
