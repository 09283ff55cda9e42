#include "doctest.h"
#include "support.hpp"

#include "jamwatch/errors.hpp"
#include "jamwatch/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

using namespace jamwatch;

namespace {

ChirpConfig one_mhz_chirp(double f_start) {
  ChirpConfig cfg;
  cfg.start_freq_hz = f_start;
  cfg.freq_min_hz = f_start;
  cfg.freq_max_hz = f_start + 1e6;
  cfg.sweep_period_s = 1e-3;
  return cfg;
}

// Naive DFT peak of one frame, returned as a signed frequency in Hz.
double frame_peak_hz(const std::vector<Sample>& x, std::size_t start, std::size_t len, double fs) {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 0; k < len; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < len; ++n)
      acc += x[start + n] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * n) / double(len));
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  double f = double(best) * fs / double(len);
  if (f >= fs / 2.0)
    f -= fs;
  return f;
}

double wrapped(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

} // namespace

TEST_SUITE("waveform") {

TEST_CASE("phase and frequency at the sweep start and midpoint") {
  ChirpConfig cfg = one_mhz_chirp(-0.5e6);
  CHECK(chirp_phase(0.0, cfg) == 0.0);
  CHECK(chirp_frequency(0.0, cfg) == doctest::Approx(-0.5e6));
  CHECK(chirp_frequency(0.5e-3, cfg) == doctest::Approx(-0.5e6 + 0.5e6));
  cfg.direction = -1;
  cfg.start_freq_hz = 0.5e6;
  CHECK(chirp_frequency(0.25e-3, cfg) == doctest::Approx(0.25e6));
}

TEST_CASE("finite-difference frequency at a quarter sweep") {
  const double fs = 4e6;
  const ChirpConfig cfg = one_mhz_chirp(0.0);
  const auto buf = gen_chirp(cfg, fs, 1e-3);
  const std::size_t n = 1000; // tau = 0.25 ms
  const double dphi = std::arg(buf.samples[n + 1] * std::conj(buf.samples[n]));
  const double f = dphi * fs / (2.0 * std::numbers::pi);
  const double quantum = 1e6 / 1e-3 / fs; // frequency step per sample
  CHECK(std::abs(f - 250e3) <= quantum);
}

TEST_CASE("constant envelope") {
  ChirpConfig cfg = one_mhz_chirp(-0.5e6);
  auto buf = gen_chirp(cfg, 4e6, 3e-3);
  CHECK(buf.mean_power() == doctest::Approx(1.0).epsilon(1e-12));
  cfg.power = 4.0;
  buf = gen_chirp(cfg, 4e6, 3e-3);
  double lo = 1e300, hi = 0.0;
  for (const auto& s : buf.samples) {
    lo = std::min(lo, std::norm(s));
    hi = std::max(hi, std::norm(s));
  }
  CHECK((hi - lo) / hi < 1e-12);
  CHECK(std::sqrt(hi) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("spectrogram track follows the ramp and repeats every sweep") {
  const double fs = 4e6;
  const std::size_t frame = 80; // 50 kHz bins
  const double bin = fs / double(frame);
  const ChirpConfig cfg = one_mhz_chirp(-0.5e6);
  const auto buf = gen_chirp(cfg, fs, 2e-3);
  const std::size_t frames = buf.size() / frame;
  REQUIRE(frames == 100);
  std::vector<double> track(frames);
  double worst = 0.0;
  for (std::size_t i = 0; i < frames; ++i) {
    track[i] = frame_peak_hz(buf.samples, i * frame, frame, fs);
    const double t_mid = (double(i * frame) + double(frame - 1) / 2.0) / fs;
    worst = std::max(worst, std::abs(track[i] - chirp_frequency(t_mid, cfg)));
  }
  CHECK(worst <= bin);

  // Least-squares slope over the first sweep.
  const std::size_t per_sweep = frames / 2;
  double st = 0, sf = 0, stt = 0, stf = 0;
  for (std::size_t i = 0; i < per_sweep; ++i) {
    const double t = (double(i * frame) + double(frame - 1) / 2.0) / fs;
    st += t;
    sf += track[i];
    stt += t * t;
    stf += t * track[i];
  }
  const double n = double(per_sweep);
  const double slope = (n * stf - st * sf) / (n * stt - st * st);
  CHECK(std::abs(slope - 1e9) * 1e-3 <= bin);

  for (std::size_t i = 0; i < per_sweep; ++i)
    CHECK(track[i] == track[i + per_sweep]);
}

TEST_CASE("phase steps stay small across sweep resets with continuous phase") {
  const double fs = 4e6;
  ChirpConfig cfg = one_mhz_chirp(-0.5e6);
  cfg.start_freq_hz = -0.3712e6; // per-sweep advance not a multiple of 2 pi
  cfg.freq_min_hz = -0.3712e6;
  cfg.freq_max_hz = 0.6288e6;
  cfg.phase_rad = 0.3;
  const auto buf = gen_chirp(cfg, fs, 4e-3);
  const double max_step = 2.0 * std::numbers::pi * 0.6288e6 / fs + 1e-6;
  for (std::size_t n = 0; n + 1 < buf.size(); ++n) {
    const double step = std::abs(std::arg(buf.samples[n + 1] * std::conj(buf.samples[n])));
    REQUIRE(step < max_step);
  }
  // Without continuity the reset jumps.
  cfg.continuous_phase = false;
  const double t_before = 1e-3 - 1.0 / fs;
  const double jump = std::abs(wrapped(chirp_phase(1e-3, cfg) - chirp_phase(t_before, cfg)));
  CHECK(jump > max_step);
}

TEST_CASE("nyquist guard") {
  const ChirpConfig cfg = one_mhz_chirp(-0.5e6);
  CHECK(chirp_min_sample_rate(cfg) == doctest::Approx(2.0 * 1.5e6));
  CHECK_THROWS_AS(gen_chirp(cfg, 2.9e6, 1e-3), NyquistViolation);
  CHECK_NOTHROW(gen_chirp(cfg, 3e6, 1e-3));
}

TEST_CASE("noise power and determinism") {
  const auto a = gen_noise(1e6, 1.0, 1.0, 42);
  REQUIRE(a.size() == 1000000);
  CHECK(a.mean_power() >= 0.99);
  CHECK(a.mean_power() <= 1.01);
  const auto b = gen_noise(1e6, 1.0, 1.0, 42);
  CHECK(a.samples == b.samples);
  const auto c = gen_noise(1e6, 1.0, 1.0, 43);
  CHECK(a.samples != c.samples);
  CHECK_THROWS_AS(gen_noise(1e6, 1.0, 0.0, 1), InvalidArgument);
}

TEST_CASE("stepped schedule layout") {
  const auto s = build_schedule(7, 30, 200, 0, 5);
  REQUIRE(s.size() == 7);
  for (int k = 0; k < 7; ++k)
    CHECK(s.intervals()[k].jnr_db == 5.0 * k);
  const auto one = build_schedule(1, 10, 0, -3, 5);
  REQUIRE(one.size() == 1);
  CHECK(one.intervals()[0].jnr_db == -3.0);
  const auto three = build_schedule(3, 120, 60, 0, 5);
  CHECK(three.intervals()[0].start_s == 60.0);
  CHECK(three.intervals()[1].start_s == 240.0);
  CHECK(three.intervals()[2].start_s == 420.0);
  CHECK(three.jnr_at(250.0) == 5.0);
  CHECK_FALSE(three.jnr_at(200.0).has_value());
  CHECK_THROWS_AS(JammingSchedule({{0, 10, 0}, {5, 15, 0}}), InvalidArgument);
}

TEST_CASE("combine scales interference to the scheduled JNR") {
  const double fs = 1e6;
  const auto noise = gen_noise(fs, 0.2, 1.0, 7);
  ChirpConfig cfg = one_mhz_chirp(-0.1e6);
  cfg.freq_max_hz = 0.1e6;
  cfg.power = 3.7;
  const auto jam = gen_chirp(cfg, fs, 0.2);

  SUBCASE("empty schedule is the identity") {
    const auto out = combine(noise, jam, JammingSchedule{});
    CHECK(out.samples == noise.samples);
  }
  SUBCASE("0 dB interval carries unit power") {
    IqBuffer silent{fs, 0.0, std::vector<Sample>(noise.size())};
    const auto out = combine(silent, jam, JammingSchedule({{0.05, 0.15, 0.0}}));
    IqBuffer in{fs, 0.05, {out.samples.begin() + 50000, out.samples.begin() + 150000}};
    CHECK(in.mean_power() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(out.samples[49999] == Sample{});
    CHECK(out.samples[150000] == Sample{});
  }
  SUBCASE("abutting intervals are 5 dB apart") {
    IqBuffer silent{fs, 0.0, std::vector<Sample>(noise.size())};
    const auto out = combine(silent, jam, JammingSchedule({{0.0, 0.1, 0.0}, {0.1, 0.2, 5.0}}));
    IqBuffer a{fs, 0.0, {out.samples.begin(), out.samples.begin() + 100000}};
    IqBuffer b{fs, 0.1, {out.samples.begin() + 100000, out.samples.end()}};
    CHECK(std::abs(10.0 * std::log10(b.mean_power() / a.mean_power()) - 5.0) < 0.1);
  }
  SUBCASE("masking the intervals recovers the signal") {
    const JammingSchedule sched({{0.02, 0.06, 3.0}, {0.1, 0.13, 12.0}});
    const auto out = combine(noise, jam, sched);
    for (std::size_t n = 0; n < out.size(); ++n)
      if (!sched.interval_at(noise.time_at(n)))
        REQUIRE(out.samples[n] == noise.samples[n]);
  }
  SUBCASE("mismatched buffers") {
    const auto other = gen_chirp(cfg, 2e6, 0.2);
    CHECK_THROWS_AS(combine(noise, other, JammingSchedule{}), BufferMismatch);
    const auto short_jam = gen_chirp(cfg, fs, 0.1);
    CHECK_THROWS_AS(combine(noise, short_jam, JammingSchedule{}), BufferMismatch);
  }
}

TEST_CASE("iq32 dump round trip at float precision") {
  const auto dir = testing::scratch("iq32");
  const auto buf = gen_noise(1e5, 0.01, 2.0, 3, 1.5);
  write_iq32(dir / "x.iq32", buf);
  const auto back = read_iq32(dir / "x.iq32");
  CHECK(back.sample_rate == buf.sample_rate);
  CHECK(back.t0 == buf.t0);
  REQUIRE(back.size() == buf.size());
  for (std::size_t n = 0; n < buf.size(); ++n) {
    CHECK(back.samples[n].real() == float(buf.samples[n].real()));
    CHECK(back.samples[n].imag() == float(buf.samples[n].imag()));
  }
}

}
