#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oppspec/linkbudget.hpp"
#include "oppspec/occupancy.hpp"
#include "oppspec/sensing.hpp"

namespace oppspec {

struct AccessPolicy {
  double period_s = 1.0;       // T
  double sensing_time_s = 20e-3;
  int num_channels = 1;        // L
  void validate() const;
};

/// eta = T / (T + t_s)
double transmission_efficiency(double period_s, double sensing_time_s);

/// Captured-opportunity fraction for one channel under period T, evaluated
/// with the ON-state mixture parameters:
/// zeta = (1-u) * sum_i (w_i / (lam_i T)) (1 - exp(-lam_i T)).
double captured_opportunities(const ChannelModel& ch, double period_s);

/// Same quantity evaluated from the OFF-state mixture in its renewal
/// equilibrium: the residual idle time actually seen at a sensing instant.
/// Coincides with captured_opportunities for symmetric single-exponential
/// channels; used to diagnose the closed form against the trace oracle.
double captured_opportunities_renewal(const ChannelModel& ch, double period_s);

/// zeta_s = 1 - prod(1 - zeta_l)
double system_captured(std::span<const double> zetas);

/// tau = (1 - pfa) * F_Y(T) with F_Y the OFF-dwell mixture CDF.
double mutual_fraction(const ExpMixture& off, double period_s, double pfa);

/// tau evaluated with the equilibrium (residual) OFF distribution; the
/// renewal-consistent counterpart of mutual_fraction.
double mutual_fraction_renewal(const ExpMixture& off, double period_s,
                               double pfa);

/// chi = 1 - eta * zeta_s * (1 - alpha * tau)
double chi_from_parts(double eta, double zeta_s, double alpha, double tau);

/// Throughput drop for a channel set at period T. For heterogeneous channels
/// the serving-channel tau is averaged with weights proportional to each
/// channel's captured-opportunity share.
double throughput_drop(const AccessPolicy& policy,
                       std::span<const ChannelModel> channels,
                       const RadioEnv& env, double pfa);

enum class SnrAveraging {
  HighSnrApprox,  // E{log2(1+g)} ~ mean_dB * ln(10)/(10 ln 2)
  Quadrature,     // 64-node Gauss-Hermite over the dB-domain Gaussian
};

struct ThroughputFigures {
  double eta = 0.0;
  std::vector<double> zeta_per_channel;
  double zeta_s = 0.0;
  double tau = 0.0;
  double chi = 0.0;
  double c0_mean_bps = 0.0;
  double c_all_mean_bps = 0.0;
};

/// Closed-form throughput figures:
/// E{C_all} = eta * zeta_s * (tau E{C} + (1-tau) E{C0}), chi = 1 - ratio.
/// HighSnrApprox mode reproduces the chi algebra of throughput_drop exactly;
/// Quadrature mode is the reference evaluation. Throws DomainError when the
/// high-SNR mode is requested with a non-positive mean SNR in dB.
ThroughputFigures expected_throughputs(const AccessPolicy& policy,
                                       std::span<const ChannelModel> channels,
                                       const RadioEnv& env, double pfa,
                                       SnrAveraging mode);

struct OptimizeResult {
  double t_opt_s = 0.0;
  double chi_min = 0.0;    // objective value (high-SNR chi) at t_opt
  double c_opt_bps = 0.0;  // quadrature-mode E{C_all} at t_opt
  bool boundary = false;   // argmin hit a bracket edge (chi monotone)
};

/// argmin of chi(T) over [t_min, t_max]: 200-point log-spaced scan, then
/// golden-section refinement of the bracketed minimum to 1e-4 s.
OptimizeResult optimize_interval(std::span<const ChannelModel> channels,
                                 const RadioEnv& env,
                                 const DetectorSpec& detector, double t_min_s,
                                 double t_max_s);

/// Default search bracket: [t_s, 100 * longest mean dwell].
std::pair<double, double> default_interval_bounds(
    std::span<const ChannelModel> channels, double sensing_time_s);

/// Periods at which chi(T) crosses a target drop, if any: the crossings left
/// and right of the minimum. Suboptimal fixed-drop solve of the same closed
/// form.
std::optional<std::pair<double, double>> solve_for_target_drop(
    std::span<const ChannelModel> channels, const RadioEnv& env,
    const DetectorSpec& detector, double target_chi, double t_min_s,
    double t_max_s);

}  // namespace oppspec
