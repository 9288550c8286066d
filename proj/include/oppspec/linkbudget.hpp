#pragma once

namespace oppspec {

/// Deployment geometry and radio parameters. Carrier frequency is in GHz
/// inside the path-loss log terms; noise power over the band is
/// noise_density_dbm_hz + 10*log10(bandwidth_hz).
struct RadioEnv {
  double pt_mbs_dbm = 40.0;
  double pt_fbs_dbm = 23.85;
  double mbs_distance_m = 100.0;   // R, macro site to building
  double indoor_distance_m = 10.0; // d, wall to terminal
  double carrier_ghz = 2.65;
  double shadow_sigma_mbs_db = 7.0;
  double shadow_sigma_fbs_db = 4.0;
  double noise_density_dbm_hz = -170.0;
  double bandwidth_hz = 5e6;

  double noise_power_dbm() const;
  void validate() const;
};

/// Gaussian in the dB domain (log-normal in linear units).
struct DbNormal {
  double mean_db = 0.0;
  double sigma_db = 0.0;
};

enum class LinkType { MbsToIndoor, FbsIndoor };

/// Outdoor-to-indoor loss for the macro link, indoor loss for the femto link.
double path_loss_db(const RadioEnv& env, LinkType link);

/// Received power at the terminal: transmit power minus path loss, with the
/// per-link shadowing spread.
DbNormal received_power_dist(const RadioEnv& env, LinkType link);

struct SinrDistributions {
  DbNormal gamma;   // SINR under mutual operation (interference dominated)
  DbNormal gamma0;  // SNR without interference
};

SinrDistributions sinr_dist(const RadioEnv& env);

/// alpha = (mu_M - N) / (mu_F - N), all terms in dB with N the in-band noise
/// power. Interference-to-signal headroom ratio used by the throughput-drop
/// closed form.
double alpha_ratio(const RadioEnv& env);

/// FBS transmit power (dBm) that yields the target interference-free mean
/// throughput E{C0} under Gauss-Hermite averaging of the shadowed SNR.
double calibrate_fbs_power_dbm(const RadioEnv& env, double target_c0_bps);

}  // namespace oppspec
