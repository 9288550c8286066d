#include "oppspec/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "oppspec/errors.hpp"
#include "oppspec/mathutil.hpp"

namespace oppspec {

namespace {
// High-SNR dB-scale reading of E{log2(1+g)}: mean_db * ln(10)/(10 ln 2).
constexpr double kSeSlopePerDb = 0.33219280948873623478703194295;
}  // namespace

void AccessPolicy::validate() const {
  if (!(period_s > 0.0))
    throw ValidationError("AccessPolicy: period must be positive");
  if (!(sensing_time_s > 0.0))
    throw ValidationError("AccessPolicy: sensing time must be positive");
  if (num_channels < 1)
    throw ValidationError("AccessPolicy: need at least one channel");
}

double transmission_efficiency(double period_s, double sensing_time_s) {
  if (!(period_s > 0.0) || sensing_time_s < 0.0)
    throw ValidationError("transmission_efficiency: T must be positive, t_s >= 0");
  return period_s / (period_s + sensing_time_s);
}

double captured_opportunities(const ChannelModel& ch, double period_s) {
  if (!(period_s > 0.0))
    throw ValidationError("captured_opportunities: T must be positive");
  const double u = duty_cycle(ch);
  double acc = 0.0;
  const auto& w = ch.on.weights();
  const auto& lam = ch.on.rates();
  for (std::size_t i = 0; i < w.size(); ++i)
    acc += w[i] / (lam[i] * period_s) * -std::expm1(-lam[i] * period_s);
  return (1.0 - u) * acc;
}

double captured_opportunities_renewal(const ChannelModel& ch, double period_s) {
  if (!(period_s > 0.0))
    throw ValidationError("captured_opportunities_renewal: T must be positive");
  const double u = duty_cycle(ch);
  const ExpMixture eq = ch.off.equilibrium();
  double acc = 0.0;
  const auto& w = eq.weights();
  const auto& lam = eq.rates();
  for (std::size_t i = 0; i < w.size(); ++i)
    acc += w[i] / (lam[i] * period_s) * -std::expm1(-lam[i] * period_s);
  return (1.0 - u) * acc;
}

double system_captured(std::span<const double> zetas) {
  if (zetas.empty())
    throw ValidationError("system_captured: need at least one channel");
  double miss = 1.0;
  for (double z : zetas) {
    if (!(z >= 0.0 && z <= 1.0))
      throw ValidationError("system_captured: zeta outside [0, 1]");
    miss *= 1.0 - z;
  }
  return 1.0 - miss;
}

double mutual_fraction(const ExpMixture& off, double period_s, double pfa) {
  if (!(period_s > 0.0))
    throw ValidationError("mutual_fraction: T must be positive");
  if (!(pfa >= 0.0 && pfa < 1.0))
    throw ValidationError("mutual_fraction: pfa must lie in [0, 1)");
  return (1.0 - pfa) * off.cdf(period_s);
}

double mutual_fraction_renewal(const ExpMixture& off, double period_s,
                               double pfa) {
  if (!(period_s > 0.0))
    throw ValidationError("mutual_fraction_renewal: T must be positive");
  if (!(pfa >= 0.0 && pfa < 1.0))
    throw ValidationError("mutual_fraction_renewal: pfa must lie in [0, 1)");
  return (1.0 - pfa) * off.equilibrium().cdf(period_s);
}

double chi_from_parts(double eta, double zeta_s, double alpha, double tau) {
  return 1.0 - eta * zeta_s * (1.0 - alpha * tau);
}

namespace {

struct ChiParts {
  double eta, zeta_s, tau;
  std::vector<double> zetas;
};

ChiParts chi_parts(double period_s, double sensing_time_s,
                   std::span<const ChannelModel> channels, double pfa) {
  ChiParts parts;
  parts.eta = transmission_efficiency(period_s, sensing_time_s);
  parts.zetas.reserve(channels.size());
  for (const auto& ch : channels)
    parts.zetas.push_back(captured_opportunities(ch, period_s));
  parts.zeta_s = system_captured(parts.zetas);
  // Serving-channel tau: weight each channel by its captured share.
  double zsum = 0.0;
  for (double z : parts.zetas) zsum += z;
  double tau = 0.0;
  for (std::size_t l = 0; l < channels.size(); ++l) {
    const double w = zsum > 0.0 ? parts.zetas[l] / zsum
                                : 1.0 / static_cast<double>(channels.size());
    tau += w * mutual_fraction(channels[l].off, period_s, pfa);
  }
  parts.tau = tau;
  return parts;
}

}  // namespace

double throughput_drop(const AccessPolicy& policy,
                       std::span<const ChannelModel> channels,
                       const RadioEnv& env, double pfa) {
  policy.validate();
  if (channels.empty())
    throw ValidationError("throughput_drop: need at least one channel");
  const ChiParts parts =
      chi_parts(policy.period_s, policy.sensing_time_s, channels, pfa);
  return chi_from_parts(parts.eta, parts.zeta_s, alpha_ratio(env), parts.tau);
}

ThroughputFigures expected_throughputs(const AccessPolicy& policy,
                                       std::span<const ChannelModel> channels,
                                       const RadioEnv& env, double pfa,
                                       SnrAveraging mode) {
  policy.validate();
  if (channels.empty())
    throw ValidationError("expected_throughputs: need at least one channel");
  const SinrDistributions sinr = sinr_dist(env);
  double se0, se;  // E{log2(1+gamma0)}, E{log2(1+gamma)}
  if (mode == SnrAveraging::HighSnrApprox) {
    if (sinr.gamma0.mean_db <= 0.0)
      throw DomainError(
          "expected_throughputs: mean SNR <= 0 dB invalidates the high-SNR "
          "mode; use Quadrature");
    se0 = kSeSlopePerDb * sinr.gamma0.mean_db;
    se = kSeSlopePerDb * sinr.gamma.mean_db;
  } else {
    se0 = expected_spectral_efficiency(sinr.gamma0.mean_db, sinr.gamma0.sigma_db);
    se = expected_spectral_efficiency(sinr.gamma.mean_db, sinr.gamma.sigma_db);
  }
  const ChiParts parts =
      chi_parts(policy.period_s, policy.sensing_time_s, channels, pfa);
  ThroughputFigures fig;
  fig.eta = parts.eta;
  fig.zeta_per_channel = parts.zetas;
  fig.zeta_s = parts.zeta_s;
  fig.tau = parts.tau;
  fig.c0_mean_bps = env.bandwidth_hz * se0;
  const double c_mean = env.bandwidth_hz * se;
  fig.c_all_mean_bps = parts.eta * parts.zeta_s *
                       (parts.tau * c_mean + (1.0 - parts.tau) * fig.c0_mean_bps);
  fig.chi = 1.0 - fig.c_all_mean_bps / fig.c0_mean_bps;
  return fig;
}

std::pair<double, double> default_interval_bounds(
    std::span<const ChannelModel> channels, double sensing_time_s) {
  double longest = 0.0;
  for (const auto& ch : channels)
    longest = std::max({longest, ch.on.mean(), ch.off.mean()});
  return {sensing_time_s, 100.0 * longest};
}

namespace {

constexpr int kGridPoints = 200;
constexpr double kRefineTol = 1e-4;  // seconds
constexpr double kGolden = 0.61803398874989484820458683437;

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > kRefineTol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

OptimizeResult optimize_interval(std::span<const ChannelModel> channels,
                                 const RadioEnv& env,
                                 const DetectorSpec& detector, double t_min_s,
                                 double t_max_s) {
  if (channels.empty())
    throw ValidationError("optimize_interval: need at least one channel");
  if (!(t_min_s >= 0.0) || !(t_max_s > t_min_s))
    throw ValidationError("optimize_interval: need 0 <= t_min < t_max");
  const double ts = detector.sensing_time_s;
  const double pfa = detector.target_pfa;
  const double alpha = alpha_ratio(env);
  const auto chi = [&](double T) {
    const ChiParts parts = chi_parts(T, ts, channels, pfa);
    return chi_from_parts(parts.eta, parts.zeta_s, alpha, parts.tau);
  };

  // Log-spaced scan; fall back to linear when the bracket touches zero.
  const double lo = t_min_s > 0.0 ? t_min_s : t_max_s * 1e-6;
  std::vector<double> grid(kGridPoints);
  const double lr = std::log(t_max_s / lo);
  for (int i = 0; i < kGridPoints; ++i)
    grid[i] = lo * std::exp(lr * static_cast<double>(i) / (kGridPoints - 1));
  grid.front() = t_min_s > 0.0 ? t_min_s : grid.front();
  grid.back() = t_max_s;

  int best = 0;
  double best_chi = chi(grid[0]);
  for (int i = 1; i < kGridPoints; ++i) {
    const double c = chi(grid[i]);
    if (c < best_chi) {
      best_chi = c;
      best = i;
    }
  }

  OptimizeResult res;
  if (best == 0 || best == kGridPoints - 1) {
    res.boundary = true;
    res.t_opt_s = grid[best];
    res.chi_min = best_chi;
  } else {
    res.t_opt_s = golden_section(chi, grid[best - 1], grid[best + 1]);
    res.chi_min = chi(res.t_opt_s);
    res.boundary = false;
  }

  if (ts > 0.0) {
    const AccessPolicy policy{res.t_opt_s, ts,
                              static_cast<int>(channels.size())};
    const ThroughputFigures fig = expected_throughputs(
        policy, channels, env, pfa, SnrAveraging::Quadrature);
    res.c_opt_bps = fig.c_all_mean_bps;
  } else {
    // sensing-free evaluation keeps the same algebra with eta = 1
    const ChiParts parts = chi_parts(res.t_opt_s, 0.0, channels, pfa);
    const SinrDistributions sinr = sinr_dist(env);
    const double c0 = env.bandwidth_hz * expected_spectral_efficiency(
                                             sinr.gamma0.mean_db,
                                             sinr.gamma0.sigma_db);
    const double c = env.bandwidth_hz * expected_spectral_efficiency(
                                            sinr.gamma.mean_db,
                                            sinr.gamma.sigma_db);
    res.c_opt_bps =
        parts.eta * parts.zeta_s * (parts.tau * c + (1.0 - parts.tau) * c0);
  }
  return res;
}

std::optional<std::pair<double, double>> solve_for_target_drop(
    std::span<const ChannelModel> channels, const RadioEnv& env,
    const DetectorSpec& detector, double target_chi, double t_min_s,
    double t_max_s) {
  const OptimizeResult opt =
      optimize_interval(channels, env, detector, t_min_s, t_max_s);
  if (target_chi < opt.chi_min) return std::nullopt;
  const double ts = detector.sensing_time_s;
  const double pfa = detector.target_pfa;
  const double alpha = alpha_ratio(env);
  const auto chi = [&](double T) {
    const ChiParts parts = chi_parts(T, ts, channels, pfa);
    return chi_from_parts(parts.eta, parts.zeta_s, alpha, parts.tau);
  };
  const auto bisect = [&](double a, double b) {
    // chi(a) and chi(b) straddle the target
    for (int i = 0; i < 200 && b - a > 1e-12 * std::max(1.0, b); ++i) {
      const double mid = 0.5 * (a + b);
      if ((chi(mid) - target_chi) * (chi(a) - target_chi) <= 0.0)
        b = mid;
      else
        a = mid;
    }
    return 0.5 * (a + b);
  };
  const double lo = t_min_s > 0.0 ? t_min_s : t_max_s * 1e-6;
  double left = opt.t_opt_s, right = opt.t_opt_s;
  if (chi(lo) >= target_chi) left = bisect(lo, opt.t_opt_s);
  if (chi(t_max_s) >= target_chi) right = bisect(opt.t_opt_s, t_max_s);
  return std::make_pair(left, right);
}

}  // namespace oppspec
