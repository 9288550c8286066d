#include "oppspec/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "oppspec/errors.hpp"
#include "oppspec/kernels.hpp"
#include "oppspec/mathutil.hpp"

namespace oppspec {

void OccupancyTrace::validate() const {
  if (durations.empty())
    throw ValidationError("OccupancyTrace: no dwells");
  double total = 0.0;
  for (double d : durations) {
    if (!(d > 0.0)) throw ValidationError("OccupancyTrace: dwells must be positive");
    total += d;
  }
  const double slack = durations.back() + 1e-9 * horizon_s;
  if (std::abs(total - horizon_s) > slack)
    throw ValidationError("OccupancyTrace: dwells do not tile the horizon");
}

double OccupancyTrace::occupied_fraction() const {
  double on_time = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i)
    if ((i % 2 == 0) == first_on) on_time += durations[i];
  return on_time / horizon_s;
}

namespace {

/// Forward-only reader of the dwell sequence.
class TraceCursor {
 public:
  explicit TraceCursor(const OccupancyTrace& tr)
      : tr_(&tr), end_(tr.durations.front()) {}

  /// State at time t; t must be non-decreasing across calls.
  bool on_at(double t) {
    while (end_ <= t && idx_ + 1 < tr_->durations.size()) {
      ++idx_;
      end_ += tr_->durations[idx_];
    }
    return (idx_ % 2 == 0) == tr_->first_on;
  }

  /// End of the dwell that covers the last queried time.
  double dwell_end() const { return end_; }

 private:
  const OccupancyTrace* tr_;
  std::size_t idx_ = 0;
  double end_;
};

}  // namespace

OccupancyTrace generate_trace(const ChannelModel& ch, double horizon_s,
                              Rng& rng) {
  if (!(horizon_s > 0.0))
    throw ValidationError("generate_trace: horizon must be positive");
  OccupancyTrace tr;
  tr.horizon_s = horizon_s;
  tr.origin = TraceOrigin::Generated;
  tr.first_on = rng.bernoulli(duty_cycle(ch));
  double total = 0.0;
  bool on = tr.first_on;
  while (total < horizon_s) {
    double d = sample_dwell(on ? ch.on : ch.off, rng);
    if (total + d > horizon_s) d = horizon_s - total;  // clip, never resample
    if (d > 0.0) tr.durations.push_back(d);
    total += d;
    on = !on;
  }
  return tr;
}

OracleEstimates oracle_captured(const OccupancyTrace& trace, double period_s) {
  trace.validate();
  if (!(period_s > 0.0))
    throw ValidationError("oracle_captured: period must be positive");
  if (trace.horizon_s < 1000.0 * period_s)
    throw ValidationError("oracle_captured: horizon must cover at least 1000 periods");
  const std::size_t n_inst =
      static_cast<std::size_t>(trace.horizon_s / period_s);
  TraceCursor cursor(trace);
  double captured = 0.0;
  std::size_t exploited = 0, reappeared = 0;
  for (std::size_t m = 0; m < n_inst; ++m) {
    const double t = static_cast<double>(m) * period_s;
    if (cursor.on_at(t)) continue;
    ++exploited;
    const double first_switch = cursor.dwell_end();
    if (first_switch >= t + period_s) {
      captured += period_s;
    } else {
      captured += first_switch - t;
      ++reappeared;
    }
  }
  OracleEstimates est;
  est.zeta_hat = captured / (static_cast<double>(n_inst) * period_s);
  est.tau_hat = exploited > 0 ? static_cast<double>(reappeared) /
                                    static_cast<double>(exploited)
                              : 0.0;
  return est;
}

namespace {

struct SpanLog {
  // transmitting spans, converted to rates in one batch at the end
  std::vector<double> dur;
  std::vector<double> db;
  double silent_time = 0.0;  // busy-verdict windows at zero rate
};

SimReport finish_report(const SpanLog& log, double window_time,
                        double wall_time, double captured_time,
                        double interfered_time, double bandwidth_hz,
                        std::uint64_t seed) {
  SimReport rep;
  rep.seed = seed;
  rep.captured_fraction = captured_time / window_time;
  rep.interfered_fraction = interfered_time / window_time;
  rep.no_opportunity_fraction = log.silent_time / window_time;

  std::vector<double> se(log.db.size());
  if (!log.db.empty())
    kernels::active().spectral_efficiency(log.db.data(), log.db.size(),
                                          se.data());
  double bits = 0.0;
  for (std::size_t i = 0; i < se.size(); ++i)
    bits += bandwidth_hz * se[i] * log.dur[i];
  rep.mean_throughput_bps = bits / wall_time;

  // time-weighted CDF over transmission windows
  std::vector<std::pair<double, double>> pts;  // (rate, weight)
  pts.reserve(se.size() + 1);
  if (log.silent_time > 0.0) pts.emplace_back(0.0, log.silent_time);
  for (std::size_t i = 0; i < se.size(); ++i)
    pts.emplace_back(bandwidth_hz * se[i], log.dur[i]);
  std::sort(pts.begin(), pts.end());
  double cum = 0.0;
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(pts.size());
  for (const auto& [rate, wt] : pts) {
    cum += wt / window_time;
    cdf.emplace_back(rate, std::min(cum, 1.0));
  }
  const std::size_t max_pts = 512;
  if (cdf.size() > max_pts) {
    std::vector<std::pair<double, double>> thin;
    const std::size_t stride = (cdf.size() + max_pts - 1) / max_pts;
    for (std::size_t i = 0; i < cdf.size(); i += stride) thin.push_back(cdf[i]);
    if (thin.back() != cdf.back()) thin.push_back(cdf.back());
    cdf = std::move(thin);
  }
  rep.throughput_cdf = std::move(cdf);
  return rep;
}

}  // namespace

SimReport simulate_access_traces(std::span<const OccupancyTrace> traces,
                                 const AccessPolicy& policy,
                                 const DetectorSpec& detector,
                                 const RadioEnv& env, std::uint64_t seed) {
  policy.validate();
  detector.validate();
  env.validate();
  if (traces.empty())
    throw ValidationError("simulate_access: need at least one channel");
  double duration = traces[0].horizon_s;
  for (const auto& tr : traces) {
    tr.validate();
    duration = std::min(duration, tr.horizon_s);
  }
  if (duration < 1e4 * policy.period_s)
    throw ValidationError("simulate_access: duration must cover 1e4 periods");

  const double T = policy.period_s;
  const double ts = policy.sensing_time_s;
  const double tb = detector.sensing_time_s * detector.bandwidth_hz;
  const double s2 = detector.noise_variance;
  const double rho = detection_threshold(detector);

  // conditional (state-given) verdict probabilities of the energy detector
  const double fa_cond =
      gaussian_q((rho - 2.0 * tb * s2) / (2.0 * std::sqrt(tb) * s2));
  const double mu_m = received_power_dist(env, LinkType::MbsToIndoor).mean_db;
  const double snr_sense =
      std::pow(10.0, (mu_m - env.noise_power_dbm()) / 10.0);
  const double g1 = snr_sense + 1.0;
  const double det_cond =
      gaussian_q((rho - 2.0 * tb * g1 * s2) / (2.0 * std::sqrt(tb) * g1 * s2));

  const SinrDistributions sinr = sinr_dist(env);

  Rng root(seed);
  Rng verdict_rng = root.split(1);
  Rng shadow_rng = root.split(2);

  std::vector<TraceCursor> cursors;
  cursors.reserve(traces.size());
  for (const auto& tr : traces) cursors.emplace_back(tr);

  const double cycle = ts + T;
  const std::size_t n_cycles = static_cast<std::size_t>(duration / cycle);
  std::size_t serving = 0;
  SpanLog log;
  log.dur.reserve(2 * n_cycles);
  log.db.reserve(2 * n_cycles);
  double captured_time = 0.0, interfered_time = 0.0;

  for (std::size_t m = 0; m < n_cycles; ++m) {
    const double t0 = static_cast<double>(m) * cycle;
    const bool on = cursors[serving].on_at(t0);
    const bool busy_verdict = on ? verdict_rng.uniform() < det_cond
                                 : verdict_rng.uniform() < fa_cond;
    if (busy_verdict) {
      log.silent_time += T;
      serving = (serving + 1) % traces.size();
      continue;
    }
    const double gamma0_db =
        sinr.gamma0.mean_db + sinr.gamma0.sigma_db * shadow_rng.gaussian();
    const double gamma_db =
        sinr.gamma.mean_db + sinr.gamma.sigma_db * shadow_rng.gaussian();
    double t = t0 + ts;
    const double t_end = t0 + cycle;
    while (t < t_end) {
      const bool seg_on = cursors[serving].on_at(t);
      const double seg_end = std::min(cursors[serving].dwell_end(), t_end);
      const double d = seg_end - t;
      if (d > 0.0) {
        log.dur.push_back(d);
        log.db.push_back(seg_on ? gamma_db : gamma0_db);
        (seg_on ? interfered_time : captured_time) += d;
      }
      if (seg_end <= t) break;  // numeric guard at the trace tail
      t = seg_end;
    }
  }

  const double window_time = static_cast<double>(n_cycles) * T;
  const double wall_time = static_cast<double>(n_cycles) * cycle;
  return finish_report(log, window_time, wall_time, captured_time,
                       interfered_time, env.bandwidth_hz, seed);
}

SimReport simulate_access(std::span<const ChannelModel> channels,
                          const AccessPolicy& policy,
                          const DetectorSpec& detector, const RadioEnv& env,
                          double duration_s, std::uint64_t seed) {
  if (channels.empty())
    throw ValidationError("simulate_access: need at least one channel");
  Rng root(seed);
  std::vector<OccupancyTrace> traces;
  traces.reserve(channels.size());
  for (std::size_t l = 0; l < channels.size(); ++l) {
    Rng tr_rng = root.split(1000 + l);
    traces.push_back(generate_trace(channels[l], duration_s, tr_rng));
  }
  return simulate_access_traces(traces, policy, detector, env, seed);
}

SimReport simulate_senseless_traces(std::span<const OccupancyTrace> traces,
                                    const RadioEnv& env, std::uint64_t seed) {
  env.validate();
  if (traces.empty())
    throw ValidationError("simulate_senseless: need at least one channel");
  Rng root(seed);
  Rng pick_rng = root.split(3);
  Rng shadow_rng = root.split(4);
  const auto& tr = traces[pick_rng.below(traces.size())];
  tr.validate();
  const SinrDistributions sinr = sinr_dist(env);

  SpanLog log;
  double captured_time = 0.0, interfered_time = 0.0;
  bool on = tr.first_on;
  for (double d : tr.durations) {
    const DbNormal& dist = on ? sinr.gamma : sinr.gamma0;
    log.dur.push_back(d);
    log.db.push_back(dist.mean_db + dist.sigma_db * shadow_rng.gaussian());
    (on ? interfered_time : captured_time) += d;
    on = !on;
  }
  return finish_report(log, tr.horizon_s, tr.horizon_s, captured_time,
                       interfered_time, env.bandwidth_hz, seed);
}

SimReport simulate_senseless(std::span<const ChannelModel> channels,
                             const RadioEnv& env, double duration_s,
                             std::uint64_t seed) {
  if (channels.empty())
    throw ValidationError("simulate_senseless: need at least one channel");
  Rng root(seed);
  std::vector<OccupancyTrace> traces;
  traces.reserve(channels.size());
  for (std::size_t l = 0; l < channels.size(); ++l) {
    Rng tr_rng = root.split(1000 + l);
    traces.push_back(generate_trace(channels[l], duration_s, tr_rng));
  }
  return simulate_senseless_traces(traces, env, seed);
}

PowerTrace synthesize_power_trace(const OccupancyTrace& occupancy,
                                  const DetectorSpec& detector, double snr_db,
                                  double sweep_period_s, Rng& rng) {
  occupancy.validate();
  detector.validate();
  if (!(sweep_period_s > 0.0))
    throw ValidationError("synthesize_power_trace: sweep period must be positive");
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double m = static_cast<double>(detector.sample_count());
  PowerTrace out;
  out.sweep_period_s = sweep_period_s;
  const std::size_t sweeps =
      static_cast<std::size_t>(occupancy.horizon_s / sweep_period_s);
  out.dbm.reserve(sweeps);
  TraceCursor cursor(occupancy);
  for (std::size_t i = 0; i < sweeps; ++i) {
    const bool on = cursor.on_at(static_cast<double>(i) * sweep_period_s);
    const double variance = detector.noise_variance * (on ? 1.0 + snr : 1.0);
    const double mean_power = variance * 2.0 * gamma_draw(0.5 * m, rng) / m;
    out.dbm.push_back(10.0 * std::log10(mean_power));
  }
  return out;
}

std::vector<OccupancyTrace> bootstrap_channels(
    std::span<const OccupancyTrace> base, int count, double horizon_s,
    Rng& rng) {
  if (base.empty())
    throw ValidationError("bootstrap_channels: empty base set");
  if (count < 1)
    throw ValidationError("bootstrap_channels: need at least one output");
  if (!(horizon_s > 0.0))
    throw ValidationError("bootstrap_channels: horizon must be positive");
  std::vector<double> pool_on, pool_off;
  double on_time = 0.0, total_time = 0.0;
  for (const auto& tr : base) {
    tr.validate();
    bool on = tr.first_on;
    for (double d : tr.durations) {
      (on ? pool_on : pool_off).push_back(d);
      if (on) on_time += d;
      total_time += d;
      on = !on;
    }
  }
  if (pool_on.empty() || pool_off.empty())
    throw ValidationError("bootstrap_channels: base lacks dwells in one state");
  const double u = on_time / total_time;

  std::vector<OccupancyTrace> out;
  out.reserve(count);
  for (int l = 0; l < count; ++l) {
    Rng ch_rng = rng.split(7000 + l);
    OccupancyTrace tr;
    tr.horizon_s = horizon_s;
    tr.origin = TraceOrigin::Bootstrapped;
    tr.first_on = ch_rng.bernoulli(u);
    double total = 0.0;
    bool on = tr.first_on;
    while (total < horizon_s) {
      const auto& pool = on ? pool_on : pool_off;
      double d = pool[ch_rng.below(pool.size())];
      if (total + d > horizon_s) d = horizon_s - total;
      if (d > 0.0) tr.durations.push_back(d);
      total += d;
      on = !on;
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace oppspec
