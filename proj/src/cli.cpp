#include "oppspec/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <set>
#include <vector>

#include "oppspec/errors.hpp"
#include "oppspec/simkernel.hpp"
#include "oppspec/version.hpp"

namespace oppspec {

namespace fs = std::filesystem;

namespace {

std::ofstream open_report(const RunConfig& cfg, const std::string& command,
                          const std::string& filename) {
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / filename;
  std::ofstream out(path);
  if (!out) throw ParseError("report: cannot write " + path.string());
  out << "# oppspec " << kVersion << "\n";
  out << "# command=" << command << "\n";
  out << "# seed=" << cfg.seed << "\n";
  out << "# config=" << config_echo(cfg) << "\n";
  return out;
}

struct ChannelDwells {
  DwellSamples on;
  DwellSamples off;
};

ChannelDwells dwells_from_ref(const ChannelRef& ref, const RunConfig& cfg) {
  ChannelDwells d;
  if (!ref.power_trace.empty()) {
    const IngestResult ing =
        ingest_power_trace(read_power_trace(ref.power_trace), build_detector(cfg));
    d.on = ing.on;
    d.off = ing.off;
  } else {
    d.on = read_dwell_file(ref.on_dwells);
    d.off = read_dwell_file(ref.off_dwells);
  }
  d.on.state = DwellState::On;
  d.off.state = DwellState::Off;
  return d;
}

ChannelModel model_from_ref(const ChannelRef& ref, const RunConfig& cfg,
                            std::ostream& diag) {
  if (!ref.model.empty()) return read_model_file(ref.model);
  const ChannelDwells d = dwells_from_ref(ref, cfg);
  const FitConfig fc = build_fit_config(cfg);
  const FitResult on = fit_mixture(d.on, fc);
  const FitResult off = fit_mixture(d.off, fc);
  for (const auto& w : on.warnings) diag << "fit ON: " << w << "\n";
  for (const auto& w : off.warnings) diag << "fit OFF: " << w << "\n";
  return ChannelModel{on.mixture, off.mixture};
}

std::vector<ChannelModel> load_channels(const RunConfig& cfg,
                                        std::ostream& diag) {
  if (cfg.channels.empty())
    throw ValidationError("config: no channels configured");
  std::vector<ChannelModel> models;
  models.reserve(cfg.channels.size());
  for (const auto& ref : cfg.channels)
    models.push_back(model_from_ref(ref, cfg, diag));
  return models;
}

std::pair<double, double> optimizer_bounds(
    const RunConfig& cfg, std::span<const ChannelModel> channels) {
  const auto dflt =
      default_interval_bounds(channels, cfg.detector.sensing_time_ms * 1e-3);
  const double lo = cfg.sim.t_min_ms ? *cfg.sim.t_min_ms * 1e-3 : dflt.first;
  const double hi = cfg.sim.t_max_ms ? *cfg.sim.t_max_ms * 1e-3 : dflt.second;
  if (!(lo < hi))
    throw ValidationError("config: optimizer bracket must satisfy t_min < t_max");
  return {lo, hi};
}

double percentile_from_cdf(
    const std::vector<std::pair<double, double>>& cdf, double q) {
  for (const auto& [value, cum] : cdf)
    if (cum >= q) return value;
  return cdf.empty() ? 0.0 : cdf.back().first;
}

// full SimReport serialization: scalar fields as a key-value header block,
// then the CDF as two columns
void write_sim_report(const RunConfig& cfg, const std::string& command,
                      const std::string& filename, const SimReport& rep) {
  std::ofstream out = open_report(cfg, command, filename);
  out << "# mean_throughput_bps=" << format_g9(rep.mean_throughput_bps) << "\n";
  out << "# captured_fraction=" << format_g9(rep.captured_fraction) << "\n";
  out << "# interfered_fraction=" << format_g9(rep.interfered_fraction) << "\n";
  out << "# no_opportunity_fraction=" << format_g9(rep.no_opportunity_fraction)
      << "\n";
  out << "# sim_seed=" << rep.seed << "\n";
  out << "throughput_bps,cum_prob\n";
  for (const auto& [bps, cum] : rep.throughput_cdf)
    out << format_g9(bps) << "," << format_g9(cum) << "\n";
}

int cmd_fit(const RunConfig& cfg, std::ostream& diag) {
  if (cfg.channels.empty())
    throw ValidationError("config: no channels configured");
  std::ofstream report = open_report(cfg, "fit", "fit_report.csv");
  report << "channel,state,k,k_effective,phi,abs_phi\n";

  std::set<int> ks{1, 2, 4, 8};
  ks.insert(cfg.fit.k);

  int channel_index = 0;
  for (const auto& ref : cfg.channels) {
    if (!ref.model.empty()) {
      diag << "channel " << channel_index
           << ": already a model file, nothing to fit\n";
      ++channel_index;
      continue;
    }
    const ChannelDwells d = dwells_from_ref(ref, cfg);
    ChannelModel fitted{ExpMixture({1.0}, {1.0}), ExpMixture({1.0}, {1.0})};
    for (int k : ks) {
      FitConfig fc = build_fit_config(cfg);
      fc.k = k;
      const auto fit_one = [&](const DwellSamples& samples, const char* state) {
        // table entries other than the configured k may be infeasible on
        // this dataset; record them instead of aborting the command
        try {
          const FitResult fr = fit_mixture(samples, fc);
          for (const auto& w : fr.warnings)
            diag << "channel " << channel_index << " " << state << " k=" << k
                 << ": " << w << "\n";
          const double phi = goodness_of_fit(samples, fr.mixture);
          report << channel_index << "," << state << "," << k << ","
                 << fr.effective_k << "," << format_g9(phi) << ","
                 << format_g9(std::abs(phi)) << "\n";
          return std::optional<ExpMixture>(fr.mixture);
        } catch (const FitError& e) {
          if (k == cfg.fit.k) throw;
          diag << "channel " << channel_index << " " << state << " k=" << k
               << ": " << e.what() << "\n";
          report << channel_index << "," << state << "," << k << ",0,nan,nan\n";
          return std::optional<ExpMixture>();
        }
      };
      const auto on = fit_one(d.on, "ON");
      const auto off = fit_one(d.off, "OFF");
      if (k == cfg.fit.k) fitted = ChannelModel{*on, *off};
    }
    const fs::path model_path =
        fs::path(cfg.output_dir) /
        ("channel" + std::to_string(channel_index) + ".model");
    write_model_file(model_path.string(), fitted);
    diag << "wrote " << model_path.string() << "\n";
    ++channel_index;
  }
  return 0;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& diag) {
  const std::vector<ChannelModel> channels = load_channels(cfg, diag);
  const DetectorSpec det = build_detector(cfg);
  const auto [lo, hi] = optimizer_bounds(cfg, channels);

  std::ofstream report = open_report(cfg, "analyze", "analyze_curve.csv");
  report << "T_s,eta,zeta_1,zeta_s,tau,chi,c0_bps,c_all_bps\n";
  const int points = 200;
  for (int i = 0; i < points; ++i) {
    const double T = lo * std::exp(std::log(hi / lo) * i / (points - 1.0));
    const AccessPolicy policy{T, det.sensing_time_s,
                              static_cast<int>(channels.size())};
    const ThroughputFigures fig = expected_throughputs(
        policy, channels, cfg.scenario, det.target_pfa, SnrAveraging::Quadrature);
    report << format_g9(T) << "," << format_g9(fig.eta) << ","
           << format_g9(fig.zeta_per_channel.front()) << ","
           << format_g9(fig.zeta_s) << "," << format_g9(fig.tau) << ","
           << format_g9(fig.chi) << "," << format_g9(fig.c0_mean_bps) << ","
           << format_g9(fig.c_all_mean_bps) << "\n";
  }
  return 0;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& diag) {
  const std::vector<ChannelModel> channels = load_channels(cfg, diag);
  const DetectorSpec det = build_detector(cfg);
  const auto [lo, hi] = optimizer_bounds(cfg, channels);
  const OptimizeResult res =
      optimize_interval(channels, cfg.scenario, det, lo, hi);
  std::ofstream report = open_report(cfg, "optimize", "optimize_report.csv");
  report << "t_opt_s,chi_min,c_opt_bps,boundary\n";
  report << format_g9(res.t_opt_s) << "," << format_g9(res.chi_min) << ","
         << format_g9(res.c_opt_bps) << "," << (res.boundary ? 1 : 0) << "\n";
  if (res.boundary)
    diag << "chi(T) is monotone over the bracket; argmin at the edge\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& diag) {
  const std::vector<ChannelModel> channels = load_channels(cfg, diag);
  const DetectorSpec det = build_detector(cfg);
  const AccessPolicy policy = build_policy(cfg);
  const double duration = cfg.sim.duration_s;

  auto senseless = std::async(std::launch::async, [&] {
    return simulate_senseless(channels, cfg.scenario, duration, cfg.seed);
  });
  const SimReport access =
      simulate_access(channels, policy, det, cfg.scenario, duration, cfg.seed);
  const SimReport baseline = senseless.get();

  std::ofstream report = open_report(cfg, "simulate", "simulate_report.csv");
  report << "mean_throughput_bps,c_sl_bps,captured_fraction,"
            "interfered_fraction,no_opportunity_fraction\n";
  report << format_g9(access.mean_throughput_bps) << ","
         << format_g9(baseline.mean_throughput_bps) << ","
         << format_g9(access.captured_fraction) << ","
         << format_g9(access.interfered_fraction) << ","
         << format_g9(access.no_opportunity_fraction) << "\n";
  write_sim_report(cfg, "simulate", "sim_access.csv", access);
  write_sim_report(cfg, "simulate", "sim_senseless.csv", baseline);
  return 0;
}

struct SweepRow {
  int channel_count;
  double t_opt_s, mean_bps, p5, p10, p50, p90, p95;
};

SweepRow sweep_one(const RunConfig& cfg, std::span<const ChannelModel> models,
                   const DetectorSpec& det, int count) {
  std::vector<ChannelModel> models_l;
  for (int l = 0; l < count; ++l)
    models_l.push_back(models[l % models.size()]);

  const auto [lo, hi] = optimizer_bounds(cfg, models_l);
  const OptimizeResult opt =
      optimize_interval(models_l, cfg.scenario, det, lo, hi);

  const double horizon =
      std::max(cfg.sim.duration_s, 1.0001e4 * opt.t_opt_s);
  Rng root(cfg.seed + 17 * static_cast<std::uint64_t>(count));
  std::vector<OccupancyTrace> traces;
  const int provided = static_cast<int>(models.size());
  for (int l = 0; l < std::min(count, provided); ++l) {
    Rng tr_rng = root.split(100 + l);
    traces.push_back(generate_trace(models[l], horizon, tr_rng));
  }
  if (count > provided) {
    Rng boot_rng = root.split(200);
    auto extra = bootstrap_channels(traces, count - provided, horizon, boot_rng);
    for (auto& tr : extra) traces.push_back(std::move(tr));
  }

  const AccessPolicy policy{opt.t_opt_s, det.sensing_time_s, count};
  const SimReport rep = simulate_access_traces(
      traces, policy, det, cfg.scenario, cfg.seed + 31 * count);
  return {count,
          opt.t_opt_s,
          rep.mean_throughput_bps,
          percentile_from_cdf(rep.throughput_cdf, 0.05),
          percentile_from_cdf(rep.throughput_cdf, 0.10),
          percentile_from_cdf(rep.throughput_cdf, 0.50),
          percentile_from_cdf(rep.throughput_cdf, 0.90),
          percentile_from_cdf(rep.throughput_cdf, 0.95)};
}

int cmd_sweep(const RunConfig& cfg, std::ostream& diag) {
  const std::vector<ChannelModel> models = load_channels(cfg, diag);
  const DetectorSpec det = build_detector(cfg);
  const int max_l = cfg.sim.sweep_max_channels;
  if (max_l < 1)
    throw ValidationError("config: sweep_max_channels must be at least 1");

  std::vector<std::future<SweepRow>> tasks;
  tasks.reserve(max_l);
  for (int count = 1; count <= max_l; ++count)
    tasks.push_back(std::async(std::launch::async, sweep_one, std::cref(cfg),
                               std::span<const ChannelModel>(models),
                               std::cref(det), count));

  std::ofstream report = open_report(cfg, "sweep", "sweep_report.csv");
  report << "L,t_opt_s,mean_bps,p5_bps,p10_bps,p50_bps,p90_bps,p95_bps\n";
  for (auto& task : tasks) {
    const SweepRow row = task.get();
    report << row.channel_count << "," << format_g9(row.t_opt_s) << ","
           << format_g9(row.mean_bps) << "," << format_g9(row.p5) << ","
           << format_g9(row.p10) << "," << format_g9(row.p50) << ","
           << format_g9(row.p90) << "," << format_g9(row.p95) << "\n";
  }
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg,
                std::ostream& diag) {
  if (command == "fit") return cmd_fit(cfg, diag);
  if (command == "analyze") return cmd_analyze(cfg, diag);
  if (command == "optimize") return cmd_optimize(cfg, diag);
  if (command == "simulate") return cmd_simulate(cfg, diag);
  if (command == "sweep") return cmd_sweep(cfg, diag);
  throw ValidationError("unknown command '" + command + "'");
}

}  // namespace oppspec
