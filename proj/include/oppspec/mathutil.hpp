#pragma once

#include <cstddef>
#include <vector>

#include "oppspec/rng.hpp"

namespace oppspec {

/// Gaussian CCDF Q(x) = P(Z > x), evaluated through erfc for tail accuracy.
double gaussian_q(double x);

/// Inverse of gaussian_q on (0, 1). Initial rational approximation refined by
/// safeguarded Halley steps on the erfc-based Q; bisection fallback if a step
/// ever leaves the bracket. Throws DomainError outside (0, 1).
double gaussian_q_inv(double p);

/// Nodes and weights for Gauss-Hermite quadrature (weight exp(-x^2)).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached 64-node rule.
const GaussHermite& gauss_hermite_64();

/// E[log2(1 + 10^(X/10))] for X ~ N(mean_db, sigma_db^2), by Gauss-Hermite
/// quadrature. Exact for sigma_db = 0.
double expected_spectral_efficiency(double mean_db, double sigma_db);

/// Gamma(shape, 1) variate, Marsaglia-Tsang squeeze; shape >= 1. A chi-square
/// window energy with M degrees of freedom is 2 * gamma_draw(M/2, rng).
double gamma_draw(double shape, Rng& rng);

}  // namespace oppspec
