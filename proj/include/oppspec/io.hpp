#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oppspec/analytics.hpp"
#include "oppspec/linkbudget.hpp"
#include "oppspec/occupancy.hpp"
#include "oppspec/sensing.hpp"

namespace oppspec {

struct DetectorParams {
  double target_pfa = 1e-3;
  double sensing_time_ms = 20.0;
  double duty_cycle_prior = 0.5;
};

struct PolicyParams {
  double period_ms = 1000.0;
  int num_channels = 2;
};

struct FitParams {
  int k = 8;
  std::optional<double> c1_s;  // unset: 99th percentile of the samples
  double b = 2.0;
  double a = 4.0;
};

struct SimParams {
  double duration_s = 30000.0;
  std::optional<double> t_min_ms;  // optimizer bracket; unset: t_s
  std::optional<double> t_max_ms;  // unset: 100x longest mean dwell
  int sweep_max_channels = 5;
};

/// One channel input: exactly one of the members is set.
struct ChannelRef {
  std::string model;
  std::string on_dwells;
  std::string off_dwells;  // paired with on_dwells
  std::string power_trace;
};

/// Full run configuration. The JSON schema uses explicit units in key names
/// and rejects unknown keys.
struct RunConfig {
  RadioEnv scenario;
  DetectorParams detector;
  PolicyParams policy;
  FitParams fit;
  SimParams sim;
  std::vector<ChannelRef> channels;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical single-line JSON echo; load(parse(echo(cfg))) reproduces cfg.
std::string config_echo(const RunConfig& cfg);

/// Detector assembled from the config: the noise variance is the in-band
/// noise power implied by the scenario's density and bandwidth.
DetectorSpec build_detector(const RunConfig& cfg);
AccessPolicy build_policy(const RunConfig& cfg);
FitConfig build_fit_config(const RunConfig& cfg);

/// Model file: per-state blocks of
///   state=ON|OFF
///   k=<int>
///   w=<comma list>
///   lambda=<comma list per second>
ChannelModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const ChannelModel& model);

/// Dwell file: optional `# state=ON|OFF` header, one positive duration
/// (seconds) per line.
DwellSamples read_dwell_file(const std::string& path);
void write_dwell_file(const std::string& path, const DwellSamples& samples);

/// Power trace: `# sweep_period_ms=<v>` header, one dBm reading per line.
struct PowerTrace {
  double sweep_period_s = 0.030;
  std::vector<double> dbm;
};
PowerTrace read_power_trace(const std::string& path);
void write_power_trace(const std::string& path, const PowerTrace& trace);

struct IngestResult {
  DwellSamples on;
  DwellSamples off;
};

/// Thresholds each sweep against the detector's per-sample power level
/// (rho / M) and merges equal-state runs into dwells. Needs at least 100
/// sweeps.
IngestResult ingest_power_trace(const PowerTrace& trace,
                                const DetectorSpec& detector);

/// Fixed 9-significant-digit formatting used by every report.
std::string format_g9(double v);

}  // namespace oppspec
