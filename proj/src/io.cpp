#include "oppspec/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oppspec/errors.hpp"

namespace oppspec {

using nlohmann::json;

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

void reject_unknown_keys(const json& obj, const char* section,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw ValidationError(std::string("config: unknown key '") + key +
                            "' in " + section);
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& target) {
  if (obj.contains(key) && !obj.at(key).is_null()) target = obj.at(key).get<T>();
}

void maybe_opt(const json& obj, const char* key, std::optional<double>& target) {
  if (obj.contains(key)) {
    if (obj.at(key).is_null())
      target.reset();
    else
      target = obj.at(key).get<double>();
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  reject_unknown_keys(root, "top level",
                      {"scenario", "detector", "policy", "fit", "sim",
                       "channels", "seed", "output_dir"});
  if (root.contains("scenario")) {
    const json& s = root.at("scenario");
    reject_unknown_keys(
        s, "scenario",
        {"pt_mbs_dbm", "pt_fbs_dbm", "mbs_distance_m", "indoor_distance_m",
         "carrier_ghz", "shadow_sigma_mbs_db", "shadow_sigma_fbs_db",
         "noise_density_dbm_hz", "bandwidth_hz"});
    maybe(s, "pt_mbs_dbm", cfg.scenario.pt_mbs_dbm);
    maybe(s, "pt_fbs_dbm", cfg.scenario.pt_fbs_dbm);
    maybe(s, "mbs_distance_m", cfg.scenario.mbs_distance_m);
    maybe(s, "indoor_distance_m", cfg.scenario.indoor_distance_m);
    maybe(s, "carrier_ghz", cfg.scenario.carrier_ghz);
    maybe(s, "shadow_sigma_mbs_db", cfg.scenario.shadow_sigma_mbs_db);
    maybe(s, "shadow_sigma_fbs_db", cfg.scenario.shadow_sigma_fbs_db);
    maybe(s, "noise_density_dbm_hz", cfg.scenario.noise_density_dbm_hz);
    maybe(s, "bandwidth_hz", cfg.scenario.bandwidth_hz);
  }
  if (root.contains("detector")) {
    const json& d = root.at("detector");
    reject_unknown_keys(d, "detector",
                        {"target_pfa", "sensing_time_ms", "duty_cycle_prior"});
    maybe(d, "target_pfa", cfg.detector.target_pfa);
    maybe(d, "sensing_time_ms", cfg.detector.sensing_time_ms);
    maybe(d, "duty_cycle_prior", cfg.detector.duty_cycle_prior);
  }
  if (root.contains("policy")) {
    const json& p = root.at("policy");
    reject_unknown_keys(p, "policy", {"period_ms", "num_channels"});
    maybe(p, "period_ms", cfg.policy.period_ms);
    maybe(p, "num_channels", cfg.policy.num_channels);
  }
  if (root.contains("fit")) {
    const json& f = root.at("fit");
    reject_unknown_keys(f, "fit", {"k", "c1_s", "b", "a"});
    maybe(f, "k", cfg.fit.k);
    maybe_opt(f, "c1_s", cfg.fit.c1_s);
    maybe(f, "b", cfg.fit.b);
    maybe(f, "a", cfg.fit.a);
  }
  if (root.contains("sim")) {
    const json& s = root.at("sim");
    reject_unknown_keys(s, "sim",
                        {"duration_s", "t_min_ms", "t_max_ms",
                         "sweep_max_channels"});
    maybe(s, "duration_s", cfg.sim.duration_s);
    maybe_opt(s, "t_min_ms", cfg.sim.t_min_ms);
    maybe_opt(s, "t_max_ms", cfg.sim.t_max_ms);
    maybe(s, "sweep_max_channels", cfg.sim.sweep_max_channels);
  }
  if (root.contains("channels")) {
    for (const json& c : root.at("channels")) {
      reject_unknown_keys(c, "channels[]",
                          {"model", "on_dwells", "off_dwells", "power_trace"});
      ChannelRef ref;
      maybe(c, "model", ref.model);
      maybe(c, "on_dwells", ref.on_dwells);
      maybe(c, "off_dwells", ref.off_dwells);
      maybe(c, "power_trace", ref.power_trace);
      const int set = (!ref.model.empty() ? 1 : 0) +
                      (!ref.on_dwells.empty() || !ref.off_dwells.empty() ? 1 : 0) +
                      (!ref.power_trace.empty() ? 1 : 0);
      if (set != 1)
        throw ValidationError(
            "config: each channel needs exactly one of model, "
            "on_dwells+off_dwells, power_trace");
      if (!ref.on_dwells.empty() != !ref.off_dwells.empty())
        throw ValidationError(
            "config: on_dwells and off_dwells must be given together");
      cfg.channels.push_back(std::move(ref));
    }
  }
  maybe(root, "seed", cfg.seed);
  maybe(root, "output_dir", cfg.output_dir);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_echo(const RunConfig& cfg) {
  json root;
  root["scenario"] = {
      {"pt_mbs_dbm", cfg.scenario.pt_mbs_dbm},
      {"pt_fbs_dbm", cfg.scenario.pt_fbs_dbm},
      {"mbs_distance_m", cfg.scenario.mbs_distance_m},
      {"indoor_distance_m", cfg.scenario.indoor_distance_m},
      {"carrier_ghz", cfg.scenario.carrier_ghz},
      {"shadow_sigma_mbs_db", cfg.scenario.shadow_sigma_mbs_db},
      {"shadow_sigma_fbs_db", cfg.scenario.shadow_sigma_fbs_db},
      {"noise_density_dbm_hz", cfg.scenario.noise_density_dbm_hz},
      {"bandwidth_hz", cfg.scenario.bandwidth_hz},
  };
  root["detector"] = {
      {"target_pfa", cfg.detector.target_pfa},
      {"sensing_time_ms", cfg.detector.sensing_time_ms},
      {"duty_cycle_prior", cfg.detector.duty_cycle_prior},
  };
  root["policy"] = {
      {"period_ms", cfg.policy.period_ms},
      {"num_channels", cfg.policy.num_channels},
  };
  root["fit"] = {
      {"k", cfg.fit.k},
      {"c1_s", cfg.fit.c1_s ? json(*cfg.fit.c1_s) : json(nullptr)},
      {"b", cfg.fit.b},
      {"a", cfg.fit.a},
  };
  root["sim"] = {
      {"duration_s", cfg.sim.duration_s},
      {"t_min_ms", cfg.sim.t_min_ms ? json(*cfg.sim.t_min_ms) : json(nullptr)},
      {"t_max_ms", cfg.sim.t_max_ms ? json(*cfg.sim.t_max_ms) : json(nullptr)},
      {"sweep_max_channels", cfg.sim.sweep_max_channels},
  };
  root["channels"] = json::array();
  for (const auto& ref : cfg.channels) {
    json c = json::object();
    if (!ref.model.empty()) c["model"] = ref.model;
    if (!ref.on_dwells.empty()) c["on_dwells"] = ref.on_dwells;
    if (!ref.off_dwells.empty()) c["off_dwells"] = ref.off_dwells;
    if (!ref.power_trace.empty()) c["power_trace"] = ref.power_trace;
    root["channels"].push_back(std::move(c));
  }
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  return root.dump();
}

DetectorSpec build_detector(const RunConfig& cfg) {
  DetectorSpec spec;
  spec.target_pfa = cfg.detector.target_pfa;
  spec.sensing_time_s = cfg.detector.sensing_time_ms * 1e-3;
  spec.bandwidth_hz = cfg.scenario.bandwidth_hz;
  spec.noise_variance = std::pow(10.0, cfg.scenario.noise_power_dbm() / 10.0);
  spec.duty_cycle_prior = cfg.detector.duty_cycle_prior;
  spec.validate();
  return spec;
}

AccessPolicy build_policy(const RunConfig& cfg) {
  AccessPolicy p{cfg.policy.period_ms * 1e-3, cfg.detector.sensing_time_ms * 1e-3,
                 cfg.policy.num_channels};
  p.validate();
  return p;
}

FitConfig build_fit_config(const RunConfig& cfg) {
  return FitConfig{cfg.fit.k, cfg.fit.c1_s, cfg.fit.b, cfg.fit.a};
}

namespace {

std::vector<double> parse_comma_list(const std::string& text, long line_no) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() &&
             std::isspace(static_cast<unsigned char>(item[used])))
        ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("malformed numeric list entry '" + item + "'", line_no);
    }
  }
  return out;
}

struct StateBlock {
  std::string state;
  int k = 0;
  std::vector<double> w, lambda;
};

}  // namespace

ChannelModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model file: cannot open " + path);
  std::vector<StateBlock> blocks;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("model file: expected key=value", line_no);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "state") {
      if (value != "ON" && value != "OFF")
        throw ParseError("model file: state must be ON or OFF", line_no);
      blocks.push_back({});
      blocks.back().state = value;
    } else if (blocks.empty()) {
      throw ParseError("model file: '" + key + "' before any state=", line_no);
    } else if (key == "k") {
      blocks.back().k = std::stoi(value);
    } else if (key == "w") {
      blocks.back().w = parse_comma_list(value, line_no);
    } else if (key == "lambda") {
      blocks.back().lambda = parse_comma_list(value, line_no);
    } else {
      throw ParseError("model file: unknown key '" + key + "'", line_no);
    }
  }
  const StateBlock* on = nullptr;
  const StateBlock* off = nullptr;
  for (const auto& b : blocks) {
    if (b.state == "ON") on = &b;
    if (b.state == "OFF") off = &b;
  }
  if (!on || !off)
    throw ParseError("model file: need one ON and one OFF block");
  const auto build = [](const StateBlock& b) {
    if (static_cast<int>(b.w.size()) != b.k ||
        static_cast<int>(b.lambda.size()) != b.k)
      throw ParseError("model file: k does not match list lengths for state " +
                       b.state);
    return ExpMixture(b.w, b.lambda);
  };
  return ChannelModel{build(*on), build(*off)};
}

void write_model_file(const std::string& path, const ChannelModel& model) {
  std::ofstream out(path);
  if (!out) throw ParseError("model file: cannot write " + path);
  const auto dump = [&](const char* state, const ExpMixture& m) {
    out << "state=" << state << "\n";
    out << "k=" << m.component_count() << "\n";
    out << "w=";
    for (std::size_t i = 0; i < m.weights().size(); ++i)
      out << (i ? "," : "") << format_g9(m.weights()[i]);
    out << "\nlambda=";
    for (std::size_t i = 0; i < m.rates().size(); ++i)
      out << (i ? "," : "") << format_g9(m.rates()[i]);
    out << "\n";
  };
  dump("ON", model.on);
  dump("OFF", model.off);
}

DwellSamples read_dwell_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("dwell file: cannot open " + path);
  DwellSamples s;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("state=ON") != std::string::npos) s.state = DwellState::On;
      if (line.find("state=OFF") != std::string::npos) s.state = DwellState::Off;
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(line, &used);
      while (used < line.size() &&
             std::isspace(static_cast<unsigned char>(line[used])))
        ++used;
      if (used != line.size()) throw std::invalid_argument(line);
      if (!(v > 0.0)) throw std::invalid_argument(line);
      s.values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("dwell file: malformed duration '" + line + "'", line_no);
    }
  }
  return s;
}

void write_dwell_file(const std::string& path, const DwellSamples& samples) {
  std::ofstream out(path);
  if (!out) throw ParseError("dwell file: cannot write " + path);
  out << "# state=" << (samples.state == DwellState::On ? "ON" : "OFF") << "\n";
  for (double v : samples.values) out << format_g9(v) << "\n";
}

PowerTrace read_power_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("power trace: cannot open " + path);
  PowerTrace tr;
  std::string line;
  long line_no = 0;
  bool have_period = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("sweep_period_ms=");
      if (pos != std::string::npos) {
        tr.sweep_period_s = std::stod(line.substr(pos + 16)) * 1e-3;
        have_period = true;
      }
      continue;
    }
    try {
      std::size_t used = 0;
      tr.dbm.push_back(std::stod(line, &used));
      while (used < line.size() &&
             std::isspace(static_cast<unsigned char>(line[used])))
        ++used;
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ParseError("power trace: malformed reading '" + line + "'", line_no);
    }
  }
  if (!have_period)
    throw ParseError("power trace: missing '# sweep_period_ms=' header");
  if (!(tr.sweep_period_s > 0.0))
    throw ParseError("power trace: sweep period must be positive");
  return tr;
}

void write_power_trace(const std::string& path, const PowerTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("power trace: cannot write " + path);
  out << "# sweep_period_ms=" << format_g9(trace.sweep_period_s * 1e3) << "\n";
  for (double v : trace.dbm) out << format_g9(v) << "\n";
}

IngestResult ingest_power_trace(const PowerTrace& trace,
                                const DetectorSpec& detector) {
  if (trace.dbm.size() < 100)
    throw ValidationError(
        "ingest_power_trace: need at least 100 sweeps to form dwells");
  const double rho = detection_threshold(detector);
  // per-sample power equivalent of the window energy threshold
  const double threshold_linear =
      rho / static_cast<double>(detector.sample_count());
  const double threshold_dbm = 10.0 * std::log10(threshold_linear);

  IngestResult out;
  out.on.state = DwellState::On;
  out.off.state = DwellState::Off;
  bool run_on = trace.dbm.front() >= threshold_dbm;
  std::size_t run_len = 0;
  for (double reading : trace.dbm) {
    const bool on = reading >= threshold_dbm;
    if (on == run_on) {
      ++run_len;
    } else {
      (run_on ? out.on : out.off)
          .values.push_back(static_cast<double>(run_len) * trace.sweep_period_s);
      run_on = on;
      run_len = 1;
    }
  }
  (run_on ? out.on : out.off)
      .values.push_back(static_cast<double>(run_len) * trace.sweep_period_s);
  return out;
}

}  // namespace oppspec
