#include "oppspec/sensing.hpp"

#include <cmath>

#include "oppspec/errors.hpp"
#include "oppspec/kernels.hpp"
#include "oppspec/mathutil.hpp"

namespace oppspec {

long DetectorSpec::sample_count() const {
  return std::lround(2.0 * bandwidth_hz * sensing_time_s);
}

void DetectorSpec::validate() const {
  if (!(sensing_time_s > 0.0))
    throw ValidationError("DetectorSpec: sensing_time must be positive");
  if (!(bandwidth_hz > 0.0))
    throw ValidationError("DetectorSpec: bandwidth must be positive");
  if (!(noise_variance > 0.0))
    throw ValidationError("DetectorSpec: noise variance must be positive");
  if (!(duty_cycle_prior >= 0.0 && duty_cycle_prior < 1.0))
    throw ValidationError("DetectorSpec: duty cycle prior must lie in [0, 1)");
  if (!(target_pfa > 0.0 && target_pfa < 1.0 - duty_cycle_prior))
    throw ValidationError(
        "DetectorSpec: target_pfa must lie in (0, 1 - duty_cycle_prior)");
  if (sample_count() < 1)
    throw ValidationError("DetectorSpec: 2*B*t_s must round to at least one sample");
}

double detection_threshold(const DetectorSpec& spec) {
  spec.validate();
  const double arg = spec.target_pfa / (1.0 - spec.duty_cycle_prior);
  if (!(arg > 0.0 && arg < 1.0))
    throw DomainError("detection_threshold: pfa/(1-u) outside (0, 1)");
  const double tb = spec.sensing_time_s * spec.bandwidth_hz;
  return 2.0 * std::sqrt(tb) * spec.noise_variance * gaussian_q_inv(arg) +
         2.0 * tb * spec.noise_variance;
}

DetectorPerformance detector_performance(const DetectorSpec& spec, double rho,
                                         double snr_linear) {
  spec.validate();
  if (!(rho > 0.0))
    throw ValidationError("detector_performance: rho must be positive");
  if (!(snr_linear >= 0.0))
    throw ValidationError("detector_performance: SNR must be non-negative");
  const double tb = spec.sensing_time_s * spec.bandwidth_hz;
  const double u = spec.duty_cycle_prior;
  const double s2 = spec.noise_variance;
  const double pfa =
      (1.0 - u) * gaussian_q((rho - 2.0 * tb * s2) / (2.0 * std::sqrt(tb) * s2));
  const double g1 = snr_linear + 1.0;
  const double pd = u * gaussian_q((rho - 2.0 * tb * g1 * s2) /
                                   (2.0 * std::sqrt(tb) * g1 * s2));
  return {pfa, pd};
}

Hypothesis classify_window(std::span<const double> samples,
                           const DetectorSpec& spec, double rho) {
  if (static_cast<long>(samples.size()) != spec.sample_count())
    throw ValidationError("classify_window: window must hold exactly 2*B*t_s samples");
  const double energy =
      kernels::active().sum_squares(samples.data(), samples.size());
  return energy < rho ? Hypothesis::H0 : Hypothesis::H1;
}

}  // namespace oppspec
