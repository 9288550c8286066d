#include "oppspec/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "oppspec/errors.hpp"
#include "oppspec/kernels.hpp"

namespace oppspec {

ExpMixture::ExpMixture(std::vector<double> weights, std::vector<double> rates)
    : weights_(std::move(weights)), rates_(std::move(rates)) {
  if (weights_.empty() || weights_.size() != rates_.size())
    throw ValidationError("ExpMixture: need k >= 1 matching weights and rates");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("ExpMixture: weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("ExpMixture: weights must sum to 1 within 1e-9");
  double prev = 0.0;
  for (double r : rates_) {
    if (!(r > prev) || !std::isfinite(r))
      throw ValidationError(
          "ExpMixture: rates must be positive and strictly increasing");
    prev = r;
  }
}

double ExpMixture::pdf(double theta) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    acc += weights_[i] * rates_[i] * std::exp(-rates_[i] * theta);
  return acc;
}

double ExpMixture::survival(double theta) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    acc += weights_[i] * std::exp(-rates_[i] * theta);
  return acc;
}

double ExpMixture::cdf(double theta) const {
  // expm1 keeps the small-theta regime exact
  double acc = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    acc += weights_[i] * -std::expm1(-rates_[i] * theta);
  return acc;
}

double ExpMixture::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i)
    acc += weights_[i] / rates_[i];
  return acc;
}

void ExpMixture::pdf_batch(std::span<const double> thetas,
                           std::span<double> out) const {
  std::vector<double> coeff(rates_.size());
  for (std::size_t i = 0; i < rates_.size(); ++i)
    coeff[i] = weights_[i] * rates_[i];
  kernels::active().weighted_exp_sum(thetas.data(), thetas.size(),
                                     coeff.data(), rates_.data(),
                                     rates_.size(), out.data());
}

void ExpMixture::survival_batch(std::span<const double> thetas,
                                std::span<double> out) const {
  kernels::active().weighted_exp_sum(thetas.data(), thetas.size(),
                                     weights_.data(), rates_.data(),
                                     rates_.size(), out.data());
}

ExpMixture ExpMixture::equilibrium() const {
  std::vector<double> w(rates_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    w[i] = weights_[i] / rates_[i];
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return ExpMixture(std::move(w), rates_);
}

double duty_cycle(const ChannelModel& ch) {
  const double mon = ch.on.mean();
  const double moff = ch.off.mean();
  return mon / (mon + moff);
}

MixtureStats mixture_stats(const ExpMixture& m, double theta) {
  if (!(theta >= 0.0))
    throw ValidationError("mixture_stats: theta must be non-negative");
  return {m.pdf(theta), m.cdf(theta), m.mean()};
}

namespace {

// Right-continuous empirical CDF over a sorted sample.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> sorted) : sorted_(std::move(sorted)) {}
  double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) /
           static_cast<double>(sorted_.size());
  }
  double max() const { return sorted_.back(); }
  double percentile(double q) const {
    const std::size_t n = sorted_.size();
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(n)));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    return sorted_[idx - 1];
  }

 private:
  std::vector<double> sorted_;
};

}  // namespace

FitResult fit_mixture(const DwellSamples& samples, const FitConfig& cfg) {
  if (samples.values.empty())
    throw ValidationError("fit_mixture: empty sample set");
  for (double v : samples.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError("fit_mixture: dwell durations must be positive");
  if (cfg.k < 1) throw ValidationError("fit_mixture: k must be >= 1");
  if (!(cfg.b > 1.0)) throw ValidationError("fit_mixture: b must exceed 1");
  if (!(cfg.a > cfg.b)) throw ValidationError("fit_mixture: a must exceed b");
  if (cfg.c1_s && !(*cfg.c1_s > 0.0))
    throw ValidationError("fit_mixture: c1 must be positive");

  std::vector<double> sorted = samples.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const Ecdf F(std::move(sorted));

  const double c1 = cfg.c1_s ? *cfg.c1_s : F.percentile(0.99);
  if (!(c1 < F.max()))
    throw FitError("fit_mixture: tail anchor c1 must lie below the sample maximum");
  if (F(cfg.b * c1) >= 1.0)
    throw FitError("fit_mixture: empirical CDF saturates at b*c1; lower c1");

  struct Component {
    double rate, weight;
  };
  std::vector<Component> comps;
  std::vector<std::string> warnings;

  const auto residual = [&](double theta) {
    double r = 1.0 - F(theta);
    for (const auto& c : comps) r -= c.weight * std::exp(-c.rate * theta);
    return r;
  };

  if (cfg.k == 1) {
    // Single component: tail slope between the two anchors, unit weight.
    const double rc = 1.0 - F(c1);
    const double rb = 1.0 - F(cfg.b * c1);
    if (rc <= rb)
      throw FitError("fit_mixture: degenerate tail at level 1", 1);
    const double lam = std::log(rc / rb) / ((cfg.b - 1.0) * c1);
    return {ExpMixture({1.0}, {lam}), 1, 1, {}};
  }

  for (int level = 1; level < cfg.k; ++level) {
    const double ci = c1 * std::pow(cfg.a, -(level - 1));
    if (F(ci) == F(cfg.b * ci))
      throw FitError(
          "fit_mixture: degenerate tail, empirical CDF flat across anchors at level " +
              std::to_string(level),
          level);
    const double rc = residual(ci);
    const double rb = residual(cfg.b * ci);
    if (!(rc > 0.0) || !(rb > 0.0) || rc <= rb) {
      warnings.push_back("level " + std::to_string(level) +
                         " dropped: residual tail not resolvable");
      continue;
    }
    const double lam = std::log(rc / rb) / ((cfg.b - 1.0) * ci);
    const double w = rc * std::exp(lam * ci);
    double assigned = 0.0;
    for (const auto& c : comps) assigned += c.weight;
    if (w >= 1.0 - assigned) {
      warnings.push_back("level " + std::to_string(level) +
                         " dropped: weight exceeds unassigned mass");
      continue;
    }
    comps.push_back({lam, w});
  }

  // Final level: weight fixed by normalization, rate matched at the smallest
  // anchor. A residual below the empirical resolution (half a sample) is
  // clamped to it, which caps the recoverable rate rather than inventing one.
  double assigned = 0.0;
  for (const auto& c : comps) assigned += c.weight;
  const double wk = 1.0 - assigned;
  if (wk <= 1e-12) {
    warnings.push_back("last level dropped: no unassigned mass");
  } else {
    const double ck = c1 * std::pow(cfg.a, -(cfg.k - 1));
    double rl = residual(ck);
    const double floor = 0.5 / n;
    if (rl <= floor) {
      rl = floor;
      warnings.push_back("last level residual below empirical resolution; rate clamped");
    }
    const double lam = std::log(wk / rl) / ck;
    if (lam > 0.0)
      comps.push_back({lam, wk});
    else
      warnings.push_back("last level dropped: non-positive rate");
  }

  if (comps.empty())
    throw FitError("fit_mixture: no feasible components at any level");

  std::sort(comps.begin(), comps.end(),
            [](const Component& x, const Component& y) { return x.rate < y.rate; });
  // merge rates that collide numerically so strict monotonicity holds
  std::vector<Component> merged;
  for (const auto& c : comps) {
    if (!merged.empty() &&
        c.rate - merged.back().rate <= 1e-12 * merged.back().rate)
      merged.back().weight += c.weight;
    else
      merged.push_back(c);
  }
  double total = 0.0;
  for (const auto& c : merged) total += c.weight;
  std::vector<double> w, lam;
  for (const auto& c : merged) {
    w.push_back(c.weight / total);
    lam.push_back(c.rate);
  }
  const int effective = static_cast<int>(merged.size());
  return {ExpMixture(std::move(w), std::move(lam)), cfg.k, effective,
          std::move(warnings)};
}

Histogram empirical_histogram(std::span<const double> values) {
  if (values.size() < 4)
    throw ValidationError("empirical_histogram: need at least 4 samples");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double q25 = sorted[static_cast<std::size_t>(0.25 * (n - 1))];
  const double q75 = sorted[static_cast<std::size_t>(0.75 * (n - 1))];
  const double iqr = q75 - q25;
  const double lo = sorted.front(), hi = sorted.back();
  if (!(iqr > 0.0) || !(hi > lo))
    throw ValidationError("empirical_histogram: degenerate sample spread");
  const double fd = 2.0 * iqr * std::pow(static_cast<double>(n), -1.0 / 3.0);
  std::size_t nbins = static_cast<std::size_t>(std::ceil((hi - lo) / fd));
  nbins = std::clamp<std::size_t>(nbins, 1, 1u << 20);
  Histogram h;
  h.lo = lo;
  h.bin_width = (hi - lo) / static_cast<double>(nbins);
  h.density.assign(nbins, 0.0);
  for (double v : sorted) {
    std::size_t idx = static_cast<std::size_t>((v - lo) / h.bin_width);
    if (idx >= nbins) idx = nbins - 1;
    h.density[idx] += 1.0;
  }
  for (double& d : h.density) d /= static_cast<double>(n) * h.bin_width;
  return h;
}

namespace {

double goodness_from_density(std::span<const double> g_at_centers,
                             const Histogram& h) {
  double phi = 0.0;
  for (std::size_t j = 0; j < h.density.size(); ++j) {
    const double f = h.density[j];
    if (f <= 0.0) continue;
    const double g = g_at_centers[j];
    if (!(g > 0.0))
      throw ValidationError(
          "goodness_of_fit: candidate density vanishes on the sample support");
    phi += f * std::log(g / f) * h.bin_width;
  }
  return phi;
}

}  // namespace

double goodness_of_fit(const DwellSamples& samples, const ExpMixture& model) {
  if (samples.values.empty())
    throw ValidationError("goodness_of_fit: empty sample set");
  const Histogram h = empirical_histogram(samples.values);
  std::vector<double> centers(h.density.size());
  for (std::size_t j = 0; j < centers.size(); ++j)
    centers[j] = h.lo + (static_cast<double>(j) + 0.5) * h.bin_width;
  std::vector<double> g(centers.size());
  model.pdf_batch(centers, g);
  return goodness_from_density(g, h);
}

double goodness_of_fit(const DwellSamples& samples,
                       const std::function<double(double)>& density) {
  if (samples.values.empty())
    throw ValidationError("goodness_of_fit: empty sample set");
  const Histogram h = empirical_histogram(samples.values);
  std::vector<double> g(h.density.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = density(h.lo + (static_cast<double>(j) + 0.5) * h.bin_width);
  return goodness_from_density(g, h);
}

double sample_dwell(const ExpMixture& m, Rng& rng) {
  const auto& w = m.weights();
  std::size_t comp = w.size() - 1;
  if (w.size() > 1) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) {
        comp = i;
        break;
      }
    }
  }
  return rng.exponential(m.rates()[comp]);
}

}  // namespace oppspec
