#include "oppspec/linkbudget.hpp"

#include <cmath>

#include "oppspec/errors.hpp"
#include "oppspec/mathutil.hpp"

namespace oppspec {

double RadioEnv::noise_power_dbm() const {
  return noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

void RadioEnv::validate() const {
  if (!(mbs_distance_m > 0.0) || !(indoor_distance_m > 0.0))
    throw ValidationError("RadioEnv: distances must be positive");
  if (!(carrier_ghz > 0.0))
    throw ValidationError("RadioEnv: carrier frequency must be positive");
  if (!(bandwidth_hz > 0.0))
    throw ValidationError("RadioEnv: bandwidth must be positive");
  if (shadow_sigma_mbs_db < 0.0 || shadow_sigma_fbs_db < 0.0)
    throw ValidationError("RadioEnv: shadowing spreads must be non-negative");
}

double path_loss_db(const RadioEnv& env, LinkType link) {
  env.validate();
  if (link == LinkType::MbsToIndoor)
    return 36.7 * std::log10(env.mbs_distance_m) +
           26.0 * std::log10(env.carrier_ghz) + 0.5 * env.indoor_distance_m +
           42.7;
  return 43.3 * std::log10(env.indoor_distance_m) +
         20.0 * std::log10(env.carrier_ghz) + 11.5;
}

DbNormal received_power_dist(const RadioEnv& env, LinkType link) {
  const double pt =
      link == LinkType::MbsToIndoor ? env.pt_mbs_dbm : env.pt_fbs_dbm;
  const double sigma = link == LinkType::MbsToIndoor ? env.shadow_sigma_mbs_db
                                                     : env.shadow_sigma_fbs_db;
  return {pt - path_loss_db(env, link), sigma};
}

SinrDistributions sinr_dist(const RadioEnv& env) {
  const DbNormal pm = received_power_dist(env, LinkType::MbsToIndoor);
  const DbNormal pf = received_power_dist(env, LinkType::FbsIndoor);
  SinrDistributions out;
  out.gamma.mean_db = pf.mean_db - pm.mean_db;
  out.gamma.sigma_db =
      std::sqrt(pf.sigma_db * pf.sigma_db + pm.sigma_db * pm.sigma_db);
  out.gamma0.mean_db = pf.mean_db - env.noise_power_dbm();
  out.gamma0.sigma_db = pf.sigma_db;
  return out;
}

double alpha_ratio(const RadioEnv& env) {
  const double n = env.noise_power_dbm();
  const double mu_m = received_power_dist(env, LinkType::MbsToIndoor).mean_db;
  const double mu_f = received_power_dist(env, LinkType::FbsIndoor).mean_db;
  if (mu_f == n)
    throw DomainError("alpha_ratio: FBS mean power equals the noise floor");
  return (mu_m - n) / (mu_f - n);
}

double calibrate_fbs_power_dbm(const RadioEnv& env, double target_c0_bps) {
  env.validate();
  if (!(target_c0_bps > 0.0))
    throw ValidationError("calibrate_fbs_power_dbm: target must be positive");
  const double target_se = target_c0_bps / env.bandwidth_hz;
  const double sigma = env.shadow_sigma_fbs_db;
  // E{log2(1+gamma0)} is strictly increasing in the mean SNR; bisect on it.
  double lo = -50.0, hi = 150.0;
  while (expected_spectral_efficiency(hi, sigma) < target_se) hi += 50.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (expected_spectral_efficiency(mid, sigma) < target_se)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10) break;
  }
  const double mu_gamma0 = 0.5 * (lo + hi);
  return mu_gamma0 + env.noise_power_dbm() +
         path_loss_db(env, LinkType::FbsIndoor);
}

}  // namespace oppspec
