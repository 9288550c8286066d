#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oppspec/rng.hpp"

namespace oppspec {

/// Convex combination of exponential densities:
/// f(t) = sum_i w_i * lam_i * exp(-lam_i * t).
///
/// Invariants enforced at construction: weights non-negative and summing to 1
/// within 1e-9, rates positive and strictly increasing, at least one
/// component.
class ExpMixture {
 public:
  ExpMixture(std::vector<double> weights, std::vector<double> rates);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& rates() const { return rates_; }
  int component_count() const { return static_cast<int>(rates_.size()); }

  double pdf(double theta) const;
  double cdf(double theta) const;
  double survival(double theta) const;
  double mean() const;

  void pdf_batch(std::span<const double> thetas, std::span<double> out) const;
  void survival_batch(std::span<const double> thetas,
                      std::span<double> out) const;

  /// Renewal-equilibrium reweighting: component i gets weight proportional to
  /// w_i / lam_i. This is the distribution of the residual dwell seen by an
  /// observer arriving at a uniformly random time.
  ExpMixture equilibrium() const;

 private:
  std::vector<double> weights_;
  std::vector<double> rates_;
};

/// Paired dwell models for one channel: `on` is the occupied state.
struct ChannelModel {
  ExpMixture on;
  ExpMixture off;
};

/// Long-run fraction of time the channel is occupied:
/// mean(on) / (mean(on) + mean(off)).
double duty_cycle(const ChannelModel& ch);

struct MixtureStats {
  double pdf;
  double cdf;
  double mean;
};

/// pdf/cdf at theta >= 0 plus the mixture mean.
MixtureStats mixture_stats(const ExpMixture& m, double theta);

enum class DwellState { On, Off };

struct DwellSamples {
  std::vector<double> values;  // positive durations, seconds
  DwellState state = DwellState::Off;
};

/// Anchors for the tail-recursive fit. c1 defaults to the empirical 99th
/// percentile when unset; anchors decay as c_i = c1 * a^-(i-1) and each level
/// is matched at c_i and b*c_i.
struct FitConfig {
  int k = 8;
  std::optional<double> c1_s;
  double b = 2.0;
  double a = 4.0;
};

struct FitResult {
  ExpMixture mixture;
  int requested_k = 0;
  int effective_k = 0;
  std::vector<std::string> warnings;
};

/// Fits an exponential mixture by peeling the empirical CCDF from the tail
/// inward. Each level matches the residual tail at two anchor points;
/// infeasible levels (non-positive residual, non-positive rate, or weight
/// exceeding the unassigned mass) are dropped with a warning and the final
/// weights renormalized. A flat empirical CDF across an anchor pair is a
/// FitError naming the level.
FitResult fit_mixture(const DwellSamples& samples, const FitConfig& cfg);

/// Log-likelihood style score: integral of f*log(g/f) with f the
/// Freedman-Diaconis histogram density of the samples and g the candidate
/// density. Non-positive, with values nearer zero indicating better fit.
/// Bins with zero counts are excluded; g must be positive on every counted
/// bin center.
double goodness_of_fit(const DwellSamples& samples, const ExpMixture& model);
double goodness_of_fit(const DwellSamples& samples,
                       const std::function<double(double)>& density);

/// Histogram with Freedman-Diaconis bin width over [min, max].
struct Histogram {
  double lo = 0.0;
  double bin_width = 0.0;
  std::vector<double> density;  // per-bin density, zero-count bins are 0
};
Histogram empirical_histogram(std::span<const double> values);

/// One dwell draw: component i with probability w_i, then exponential(lam_i).
double sample_dwell(const ExpMixture& m, Rng& rng);

}  // namespace oppspec
