#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "oppspec/errors.hpp"
#include "oppspec/io.hpp"
#include "oppspec/simkernel.hpp"

using namespace oppspec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "oppspec_io_test";
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config echo round trip is byte-identical") {
  const std::string text = R"({
    "scenario": { "pt_mbs_dbm": 39.5, "bandwidth_hz": 1.0e7 },
    "detector": { "target_pfa": 1e-4 },
    "fit": { "k": 4, "c1_s": 12.5 },
    "channels": [ { "model": "a.model" },
                  { "on_dwells": "on.txt", "off_dwells": "off.txt" } ],
    "seed": 99
  })";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.scenario.pt_mbs_dbm == 39.5);
  CHECK(cfg.scenario.bandwidth_hz == 1.0e7);
  CHECK(cfg.scenario.pt_fbs_dbm == 23.85);  // default preserved
  CHECK(cfg.detector.target_pfa == 1e-4);
  CHECK(cfg.fit.k == 4);
  REQUIRE(cfg.fit.c1_s.has_value());
  CHECK(*cfg.fit.c1_s == 12.5);
  CHECK(cfg.seed == 99);
  REQUIRE(cfg.channels.size() == 2);

  const std::string echo1 = config_echo(cfg);
  const std::string echo2 = config_echo(parse_config(echo1));
  CHECK(echo1 == echo2);
}

TEST_CASE("config rejects unknown keys everywhere") {
  CHECK_THROWS_AS(parse_config(R"({"scnario": {}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"scenario": {"pt_mbs": 40}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"detector": {"pfa": 1e-3}})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"channels": [{"model": "m", "extra": 1}]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"channels": [{"on_dwells": "x"}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("{nonsense"), ParseError);
}

TEST_CASE("detector assembly uses the in-band noise power") {
  RunConfig cfg;
  const DetectorSpec det = build_detector(cfg);
  CHECK(det.noise_variance ==
        doctest::Approx(std::pow(10.0, (-170.0 + 10.0 * std::log10(5e6)) / 10.0))
            .epsilon(1e-12));
  CHECK(det.sensing_time_s == doctest::Approx(0.020));
  CHECK(det.sample_count() == 200000);
}

TEST_CASE("model file round trip") {
  const ChannelModel model{ExpMixture({0.25, 0.75}, {0.123456789, 4.5}),
                           ExpMixture({1.0}, {0.0512820513})};
  const fs::path p = scratch_dir() / "roundtrip.model";
  write_model_file(p.string(), model);
  const ChannelModel back = read_model_file(p.string());
  REQUIRE(back.on.component_count() == 2);
  CHECK(back.on.weights()[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(back.on.rates()[0] == doctest::Approx(0.123456789).epsilon(1e-9));
  CHECK(back.off.rates()[0] == doctest::Approx(0.0512820513).epsilon(1e-9));

  // malformed: k mismatch
  std::ofstream bad(scratch_dir() / "bad.model");
  bad << "state=ON\nk=2\nw=1\nlambda=1\nstate=OFF\nk=1\nw=1\nlambda=1\n";
  bad.close();
  CHECK_THROWS_AS(read_model_file((scratch_dir() / "bad.model").string()),
                  ParseError);
}

TEST_CASE("dwell file round trip with state header") {
  DwellSamples s;
  s.state = DwellState::On;
  s.values = {0.5, 1.25, 99.0};
  const fs::path p = scratch_dir() / "dwells.txt";
  write_dwell_file(p.string(), s);
  const DwellSamples back = read_dwell_file(p.string());
  CHECK(back.state == DwellState::On);
  REQUIRE(back.values.size() == 3);
  CHECK(back.values[1] == doctest::Approx(1.25));

  std::ofstream bad(scratch_dir() / "bad_dwells.txt");
  bad << "1.0\nnot-a-number\n";
  bad.close();
  try {
    read_dwell_file((scratch_dir() / "bad_dwells.txt").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("power trace format") {
  PowerTrace tr;
  tr.sweep_period_s = 0.030;
  tr.dbm = {-100.5, -99.0, -62.25};
  const fs::path p = scratch_dir() / "trace.txt";
  write_power_trace(p.string(), tr);
  const std::string text = slurp(p);
  CHECK(text.find("# sweep_period_ms=30") == 0);
  const PowerTrace back = read_power_trace(p.string());
  CHECK(back.sweep_period_s == doctest::Approx(0.030));
  REQUIRE(back.dbm.size() == 3);
  CHECK(back.dbm[2] == doctest::Approx(-62.25));

  std::ofstream no_header(scratch_dir() / "no_header.txt");
  no_header << "-100.0\n-101.0\n";
  no_header.close();
  CHECK_THROWS_AS(read_power_trace((scratch_dir() / "no_header.txt").string()),
                  ParseError);
}

TEST_CASE("ingest: alternating sweeps become sweep-length dwells") {
  DetectorSpec det;
  det.noise_variance = 1e-10;
  det.target_pfa = 1e-3;
  det.duty_cycle_prior = 0.0;
  PowerTrace tr;
  tr.sweep_period_s = 0.030;
  const double threshold_dbm =
      10.0 * std::log10(detection_threshold(det) / det.sample_count());
  for (int i = 0; i < 200; ++i)
    tr.dbm.push_back(i % 2 == 0 ? threshold_dbm + 20.0 : threshold_dbm - 20.0);
  const IngestResult got = ingest_power_trace(tr, det);
  CHECK(got.on.values.size() == 100);
  CHECK(got.off.values.size() == 100);
  for (double v : got.on.values) CHECK(v == doctest::Approx(0.030));
  for (double v : got.off.values) CHECK(v == doctest::Approx(0.030));
}

TEST_CASE("ingest: constant noise floor is a single OFF dwell") {
  DetectorSpec det;
  det.noise_variance = 1e-10;
  det.duty_cycle_prior = 0.0;
  PowerTrace tr;
  tr.sweep_period_s = 0.030;
  tr.dbm.assign(5000, -101.0);  // noise floor reading, below any threshold
  const IngestResult got = ingest_power_trace(tr, det);
  CHECK(got.on.values.empty());
  REQUIRE(got.off.values.size() == 1);
  CHECK(got.off.values[0] == doctest::Approx(5000 * 0.030));
}

TEST_CASE("ingest: under 100 sweeps is insufficient") {
  DetectorSpec det;
  det.noise_variance = 1e-10;
  PowerTrace tr;
  tr.sweep_period_s = 0.030;
  tr.dbm.assign(99, -100.0);
  CHECK_THROWS_AS(ingest_power_trace(tr, det), ValidationError);
}

TEST_CASE("ingest round trip recovers the generator duty cycle") {
  // synthesize sweeps for a known channel at 16 dB sensing SNR, ingest, and
  // compare occupied fractions
  const ChannelModel ch{ExpMixture({1.0}, {1.0 / 8.0}),
                        ExpMixture({1.0}, {1.0 / 12.0})};
  DetectorSpec det;
  det.target_pfa = 1e-5;
  det.noise_variance = std::pow(10.0, -10.3);
  det.duty_cycle_prior = 0.0;
  Rng rng(314);
  const OccupancyTrace tr = generate_trace(ch, 3.0e4, rng);
  Rng sweep_rng = rng.split(1);
  const PowerTrace sweeps =
      synthesize_power_trace(tr, det, 16.0, 0.030, sweep_rng);
  const IngestResult got = ingest_power_trace(sweeps, det);
  double on_time = 0.0, off_time = 0.0;
  for (double v : got.on.values) on_time += v;
  for (double v : got.off.values) off_time += v;
  const double u_hat = on_time / (on_time + off_time);
  CHECK(u_hat == doctest::Approx(tr.occupied_fraction()).epsilon(0.02));
}
