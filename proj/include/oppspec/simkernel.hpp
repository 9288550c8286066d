#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "oppspec/analytics.hpp"
#include "oppspec/io.hpp"
#include "oppspec/linkbudget.hpp"
#include "oppspec/occupancy.hpp"
#include "oppspec/rng.hpp"
#include "oppspec/sensing.hpp"

namespace oppspec {

enum class TraceOrigin { Generated, Ingested, Bootstrapped };

/// Alternating ON/OFF dwell realization over a fixed horizon. States are
/// implicit: dwell i is ON when (i even) == first_on.
struct OccupancyTrace {
  bool first_on = false;
  std::vector<double> durations;
  double horizon_s = 0.0;
  TraceOrigin origin = TraceOrigin::Generated;

  void validate() const;
  double occupied_fraction() const;
};

/// Draws alternating dwells from the channel model until the horizon is
/// covered; the final dwell is clipped, never resampled. The initial state is
/// ON with probability equal to the model's duty cycle.
OccupancyTrace generate_trace(const ChannelModel& ch, double horizon_s,
                              Rng& rng);

struct OracleEstimates {
  double zeta_hat;  // fraction of total time exploited before reappearance
  double tau_hat;   // fraction of exploited periods hit by a reappearance
};

/// Brute-force renewal measurement: walks sensing instants 0, T, 2T, ...
/// assuming perfect detection. An OFF verdict starts an exploited period;
/// idle time counts as captured until the first ON switch inside the period.
/// Requires horizon >= 1000 * T.
OracleEstimates oracle_captured(const OccupancyTrace& trace, double period_s);

struct SimReport {
  double mean_throughput_bps = 0.0;
  /// Time-weighted CDF of the instantaneous throughput over transmission
  /// windows, at most 512 points of (bps, cumulative probability).
  std::vector<std::pair<double, double>> throughput_cdf;
  /// Fractions of transmission-window time (sensing overhead excluded):
  /// clean transmission, transmission under MBS reappearance, and windows
  /// idled by a busy verdict. The three sum to 1.
  double captured_fraction = 0.0;
  double interfered_fraction = 0.0;
  double no_opportunity_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Periodic-sensing access replay. Each cycle is t_s of sensing followed by
/// T of either transmission (idle verdict) or silence (busy verdict, after
/// which the FBS retunes to the next channel round-robin; one channel probed
/// per instant). Sensing outcomes are drawn from the conditional
/// energy-detector probabilities; shadowing is redrawn per period.
/// Requires duration >= 1e4 * T.
SimReport simulate_access(std::span<const ChannelModel> channels,
                          const AccessPolicy& policy,
                          const DetectorSpec& detector, const RadioEnv& env,
                          double duration_s, std::uint64_t seed);

/// Same replay over caller-supplied traces (duration = shortest horizon).
SimReport simulate_access_traces(std::span<const OccupancyTrace> traces,
                                 const AccessPolicy& policy,
                                 const DetectorSpec& detector,
                                 const RadioEnv& env, std::uint64_t seed);

/// No-sensing baseline: continuous transmission on one uniformly chosen
/// channel; SINR-limited whenever the MBS is ON. Shadowing redrawn per dwell.
SimReport simulate_senseless(std::span<const ChannelModel> channels,
                             const RadioEnv& env, double duration_s,
                             std::uint64_t seed);

SimReport simulate_senseless_traces(std::span<const OccupancyTrace> traces,
                                    const RadioEnv& env, std::uint64_t seed);

/// L bootstrap channels built by resampling dwells with replacement from the
/// pooled per-state dwells of the base traces. Outputs are mutually
/// independent given the seed.
std::vector<OccupancyTrace> bootstrap_channels(
    std::span<const OccupancyTrace> base, int count, double horizon_s,
    Rng& rng);

/// Sweep-analyzer readings for an occupancy realization: each sweep reports
/// the mean sample power of one detector window (exact chi-square reading
/// noise), lifted by snr_db while the channel is ON.
PowerTrace synthesize_power_trace(const OccupancyTrace& occupancy,
                                  const DetectorSpec& detector, double snr_db,
                                  double sweep_period_s, Rng& rng);

}  // namespace oppspec
