#include "doctest.h"

#include "jamwatch/errors.hpp"
#include "jamwatch/frontend.hpp"
#include "jamwatch/waveform.hpp"

#include <cmath>
#include <vector>

using namespace jamwatch;

namespace {

IqBuffer constant(double fs, std::size_t n, Sample v) { return IqBuffer{fs, 0.0, std::vector<Sample>(n, v)}; }

double db(double x) { return 10.0 * std::log10(x); }

} // namespace

TEST_SUITE("frontend") {

TEST_CASE("loop converges to target minus input power") {
  AgcConfig cfg;
  cfg.target_power_db = 10.0;
  cfg.block_len = 20000;
  AgcState state{0.0, 0.0};
  const auto noise = gen_noise(2e6, 0.5, 1.0, 11);
  const auto out = agc_process(noise, cfg, state);
  REQUIRE(out.trace.size() == 50);
  CHECK(std::abs(out.trace.back().gain_db - 10.0) < 0.1);
  CHECK(out.trace.back().t == doctest::Approx(0.5));
  CHECK(agc_steady_state_gain(0.0, cfg) == 10.0);
}

TEST_CASE("alpha of one lands on the fixed point in one block") {
  AgcConfig cfg;
  cfg.loop_gain = 1.0;
  cfg.block_len = 100;
  cfg.target_power_db = 3.0;
  cfg.gain_min_db = -60.0;
  AgcState state{25.0, 0.0};
  const auto out = agc_process(constant(1e3, 100, {2.0, 0.0}), cfg, state);
  REQUIRE(out.trace.size() == 1);
  CHECK(state.gain_db == doctest::Approx(3.0 - db(4.0)).epsilon(1e-12));
  CHECK(std::norm(out.output.samples[0]) == doctest::Approx(std::pow(10.0, 0.3)));
}

TEST_CASE("gain drop follows total input power") {
  AgcConfig cfg;
  cfg.block_len = 20000;
  cfg.gain_min_db = -60.0;
  for (double jnr : {0.0, 5.0, 10.0, 20.0}) {
    CAPTURE(jnr);
    const auto noise = gen_noise(2e6, 0.4, 1.0, 5);
    ChirpConfig chirp;
    chirp.freq_min_hz = chirp.start_freq_hz = -0.25e6;
    chirp.freq_max_hz = 0.25e6;
    const auto jam = gen_chirp(chirp, 2e6, 0.4);
    const auto in = combine(noise, jam, JammingSchedule({{0.0, 1.0, jnr}}));
    AgcState clean{0.0, 0.0};
    agc_process(noise, cfg, clean);
    AgcState jammed{0.0, 0.0};
    agc_process(in, cfg, jammed);
    const double oracle = db(1.0 + std::pow(10.0, jnr / 10.0));
    CHECK(std::abs((clean.gain_db - jammed.gain_db) - oracle) < 0.3);
  }
}

TEST_CASE("higher input power means lower gain, clamped") {
  AgcConfig cfg;
  cfg.block_len = 1000;
  cfg.gain_min_db = -5.0;
  cfg.gain_max_db = 20.0;
  double previous = 1e9;
  for (double p_db = -40.0; p_db <= 40.0; p_db += 5.0) {
    AgcState state{0.0, 0.0};
    const double amp = std::pow(10.0, p_db / 20.0);
    const auto out = agc_process(constant(1e3, 50000, {amp, 0.0}), cfg, state);
    for (const auto& p : out.trace) {
      REQUIRE(p.gain_db >= cfg.gain_min_db);
      REQUIRE(p.gain_db <= cfg.gain_max_db);
    }
    CHECK(state.gain_db <= previous);
    previous = state.gain_db;
  }
  CHECK(previous == cfg.gain_min_db);
}

TEST_CASE("gain recovers after a jammed stretch") {
  AgcConfig cfg;
  cfg.block_len = 20000;
  cfg.gain_min_db = -60.0;
  AgcState state{0.0, 0.0};
  const auto noise = gen_noise(2e6, 1.0, 1.0, 9);
  ChirpConfig chirp;
  chirp.freq_min_hz = chirp.start_freq_hz = -0.25e6;
  chirp.freq_max_hz = 0.25e6;
  const auto in = combine(noise, gen_chirp(chirp, 2e6, 1.0), JammingSchedule({{0.2, 0.5, 15.0}}));
  const auto out = agc_process(in, cfg, state);
  const double before = out.trace[19].gain_db;
  const double during = out.trace[45].gain_db;
  CHECK(before - during > 14.0);
  // 20 blocks (200 ms) after the end the loop is back near its clean level.
  CHECK(std::abs(out.trace[70].gain_db - before) < 0.1);
}

TEST_CASE("trailing partial block gets a gain update") {
  AgcConfig cfg;
  cfg.block_len = 30;
  AgcState state{0.0, 0.0};
  const auto out = agc_process(constant(1e3, 100, {1.0, 0.0}), cfg, state);
  CHECK(out.trace.size() == 4);
  CHECK(state.last_update_t == doctest::Approx(0.1));
  CHECK_THROWS_AS(agc_process(IqBuffer{1e3, 0.0, {}}, cfg, state), EmptyInput);
}

TEST_CASE("quantizer bounds and saturation") {
  const double fs_scale = 1.0;
  for (int bits : {2, 8, 16}) {
    const double lsb = 2.0 * fs_scale / std::ldexp(1.0, bits);
    std::vector<Sample> x;
    for (int k = -50; k <= 50; ++k)
      x.emplace_back(k * 0.0199 * (fs_scale - lsb), -k * 0.0131 * (fs_scale - lsb));
    const auto r = quantize(IqBuffer{1.0, 0.0, x}, bits, fs_scale);
    for (std::size_t n = 0; n < x.size(); ++n) {
      REQUIRE(std::abs(r.output.samples[n].real() - x[n].real()) <= lsb);
      REQUIRE(std::abs(r.output.samples[n].imag() - x[n].imag()) <= lsb);
    }
    CHECK(r.clip_fraction == 0.0);
  }
  const auto sat = quantize(constant(1.0, 10, {2.0, 2.0}), 8, 1.0);
  CHECK(sat.clip_fraction == 1.0);
  CHECK_THROWS_AS(quantize(constant(1.0, 1, {}), 1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(quantize(constant(1.0, 1, {}), 17, 1.0), InvalidArgument);
}

TEST_CASE("clip fraction matches the gaussian tail") {
  // Unit-power complex noise at the setpoint: sigma per component = 1/sqrt(2).
  const auto noise = gen_noise(1e6, 1.0, 1.0, 21);
  const double sigma = std::sqrt(0.5);

  // Two sigma full scale: enough clipping to compare against the oracle.
  const double p = std::erfc(2.0 / std::sqrt(2.0));
  const double expected = 1.0 - (1.0 - p) * (1.0 - p);
  const auto tight = quantize(noise, 8, 2.0 * sigma);
  CHECK(tight.clip_fraction == doctest::Approx(expected).epsilon(0.03));

  // 12 dB backoff above the setpoint.
  const double full_scale = std::pow(10.0, 12.0 / 20.0);
  const double p12 = std::erfc(full_scale / sigma / std::sqrt(2.0));
  CHECK(2.0 * p12 < 1e-3);
  CHECK(quantize(noise, 8, full_scale).clip_fraction < 1e-3);
}

}
