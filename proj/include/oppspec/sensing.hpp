#pragma once

#include <span>

namespace oppspec {

/// Energy-detector configuration. noise_variance is the in-band noise power
/// in linear units (density integrated over the bandwidth), which at Nyquist
/// sampling equals the per-sample variance, so the expected window energy
/// under the null is 2*t_s*B*noise_variance.
struct DetectorSpec {
  double target_pfa = 1e-3;      // prior-weighted false alarm target
  double sensing_time_s = 20e-3; // t_s
  double bandwidth_hz = 5e6;     // B
  double noise_variance = 1.0;   // sigma_n^2, linear
  double duty_cycle_prior = 0.5; // u used in the prior-weighted rates

  /// M = 2*B*t_s rounded to the nearest integer.
  long sample_count() const;
  void validate() const;
};

/// Energy threshold meeting the false-alarm target:
/// rho = 2*sqrt(t_s*B)*sigma_n^2*Qinv(pfa/(1-u)) + 2*t_s*B*sigma_n^2.
double detection_threshold(const DetectorSpec& spec);

struct DetectorPerformance {
  double pfa;  // prior-weighted, in [0, 1-u]
  double pd;   // prior-weighted, in [0, u]
};

/// False-alarm and detection probabilities at threshold rho and linear SNR
/// gamma0.
DetectorPerformance detector_performance(const DetectorSpec& spec, double rho,
                                         double snr_linear);

enum class Hypothesis { H0, H1 };

/// Window decision: H0 iff the sample energy stays below rho. The window must
/// contain exactly sample_count() values.
Hypothesis classify_window(std::span<const double> samples,
                           const DetectorSpec& spec, double rho);

}  // namespace oppspec
