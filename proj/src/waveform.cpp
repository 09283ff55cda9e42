#include "jamwatch/waveform.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace jamwatch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void put_u32_le(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                  static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::filesystem::path header_path(const std::filesystem::path& path) {
  auto hdr = path;
  hdr += ".hdr";
  return hdr;
}

} // namespace

void ChirpConfig::validate() const {
  if (!(power >= 0.0) || !std::isfinite(power))
    throw InvalidArgument("chirp power must be finite and >= 0");
  if (direction != 1 && direction != -1)
    throw InvalidArgument("chirp direction must be +1 or -1");
  if (!(sweep_period_s > 0.0))
    throw InvalidArgument("chirp sweep period must be > 0");
  if (!(freq_max_hz > freq_min_hz))
    throw InvalidArgument("chirp sweep bandwidth must be > 0 (freq_max > freq_min)");
  if (!std::isfinite(start_freq_hz) || !std::isfinite(phase_rad))
    throw InvalidArgument("chirp start frequency and phase must be finite");
}

double IqBuffer::mean_power() const noexcept {
  if (samples.empty())
    return 0.0;
  double acc = 0.0;
  for (const auto& s : samples)
    acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

std::size_t sample_count(double duration, double sample_rate) {
  if (!(duration >= 0.0) || !(sample_rate > 0.0))
    throw InvalidArgument("duration must be >= 0 and sample rate > 0");
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

JammingSchedule::JammingSchedule(std::vector<JammingInterval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    const auto& iv = intervals_[k];
    if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) || !std::isfinite(iv.jnr_db))
      throw InvalidArgument("interval " + std::to_string(k) + " has non-finite fields");
    if (!(iv.end_s > iv.start_s))
      throw InvalidArgument("interval " + std::to_string(k) + " must have end_s > start_s");
    if (k > 0 && iv.start_s < intervals_[k - 1].end_s)
      throw InvalidArgument("interval " + std::to_string(k) +
                            " overlaps or precedes its predecessor (intervals must be sorted, non-overlapping)");
  }
}

std::optional<std::size_t> JammingSchedule::interval_at(double t) const noexcept {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](double v, const JammingInterval& iv) { return v < iv.start_s; });
  if (it == intervals_.begin())
    return std::nullopt;
  --it;
  if (!it->contains(t))
    return std::nullopt;
  return static_cast<std::size_t>(it - intervals_.begin());
}

std::optional<double> JammingSchedule::jnr_at(double t) const noexcept {
  if (auto k = interval_at(t))
    return intervals_[*k].jnr_db;
  return std::nullopt;
}

double chirp_phase(double t, const ChirpConfig& cfg) {
  const double period = cfg.sweep_period_s;
  const double sweeps = std::floor(t / period);
  double tau = t - sweeps * period;
  if (tau < 0.0)
    tau = 0.0;
  const double sweep_rate = cfg.direction * cfg.bandwidth() / period;
  double phase = kTwoPi * cfg.start_freq_hz * tau + std::numbers::pi * sweep_rate * tau * tau + cfg.phase_rad;
  if (cfg.continuous_phase && sweeps > 0.0) {
    // Phase advance over one full sweep, accumulated over completed sweeps.
    const double per_sweep =
        std::fmod(kTwoPi * cfg.start_freq_hz * period + std::numbers::pi * sweep_rate * period * period, kTwoPi);
    phase += std::fmod(sweeps * per_sweep, kTwoPi);
  }
  return phase;
}

double chirp_frequency(double t, const ChirpConfig& cfg) {
  const double period = cfg.sweep_period_s;
  const double tau = t - std::floor(t / period) * period;
  return cfg.start_freq_hz + cfg.direction * cfg.bandwidth() * tau / period;
}

double chirp_min_sample_rate(const ChirpConfig& cfg) noexcept {
  return 2.0 * std::max({std::abs(cfg.freq_min_hz), std::abs(cfg.freq_max_hz),
                         std::abs(cfg.start_freq_hz) + cfg.bandwidth()});
}

IqBuffer gen_chirp(const ChirpConfig& cfg, double sample_rate, double duration, double t0) {
  cfg.validate();
  if (!(t0 >= 0.0))
    throw InvalidArgument("chirp start time must be >= 0");
  const double required = chirp_min_sample_rate(cfg);
  if (!(sample_rate >= required)) {
    std::ostringstream msg;
    msg << "sample rate " << sample_rate << " Hz below the chirp Nyquist guard of " << required << " Hz";
    throw NyquistViolation(msg.str());
  }
  IqBuffer out{sample_rate, t0, {}};
  const std::size_t n = sample_count(duration, sample_rate);
  out.samples.resize(n);
  const double amplitude = std::sqrt(cfg.power);
  for (std::size_t k = 0; k < n; ++k)
    out.samples[k] = std::polar(amplitude, chirp_phase(out.time_at(k), cfg));
  return out;
}

IqBuffer gen_noise(double sample_rate, double duration, double noise_power, std::uint64_t seed, double t0) {
  if (!(noise_power > 0.0) || !std::isfinite(noise_power))
    throw InvalidArgument("noise power must be > 0");
  IqBuffer out{sample_rate, t0, {}};
  const std::size_t n = sample_count(duration, sample_rate);
  out.samples.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
  for (auto& s : out.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s = {re, im};
  }
  return out;
}

JammingSchedule build_schedule(int n_intervals, double interval_len_s, double gap_len_s, double jnr_start_db,
                               double jnr_step_db) {
  if (n_intervals < 1)
    throw InvalidArgument("schedule needs at least one interval");
  if (!(interval_len_s > 0.0))
    throw InvalidArgument("interval length must be > 0");
  if (!(gap_len_s >= 0.0))
    throw InvalidArgument("gap length must be >= 0");
  std::vector<JammingInterval> intervals;
  intervals.reserve(static_cast<std::size_t>(n_intervals));
  for (int k = 0; k < n_intervals; ++k) {
    const double start = k * (interval_len_s + gap_len_s) + gap_len_s;
    intervals.push_back({start, start + interval_len_s, jnr_start_db + k * jnr_step_db});
  }
  return JammingSchedule(std::move(intervals));
}

IqBuffer combine(const IqBuffer& signal, const IqBuffer& interference, const JammingSchedule& schedule,
                 double reference_noise_power) {
  if (signal.sample_rate != interference.sample_rate)
    throw BufferMismatch("signal and interference sample rates differ");
  if (signal.t0 != interference.t0)
    throw BufferMismatch("signal and interference are not time-aligned");
  if (interference.size() < signal.size())
    throw BufferMismatch("interference buffer shorter than signal buffer");
  if (!(reference_noise_power > 0.0))
    throw InvalidArgument("reference noise power must be > 0");

  IqBuffer out = signal;
  if (signal.empty())
    return out;
  const double fs = signal.sample_rate;
  const double t_end = signal.time_at(signal.size());
  for (const auto& iv : schedule.intervals()) {
    if (iv.end_s <= signal.t0 || iv.start_s >= t_end)
      continue;
    // First sample with t >= start, first sample with t >= end.
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil((iv.start_s - signal.t0) * fs - 1e-9)));
    const auto last = std::min(signal.size(),
                               static_cast<std::size_t>(std::max(0.0, std::ceil((iv.end_s - signal.t0) * fs - 1e-9))));
    if (first >= last)
      continue;
    double power = 0.0;
    for (std::size_t n = first; n < last; ++n)
      power += std::norm(interference.samples[n]);
    power /= static_cast<double>(last - first);
    if (power <= 0.0)
      continue;
    const double gain = std::sqrt(db_to_linear(iv.jnr_db) * reference_noise_power / power);
    for (std::size_t n = first; n < last; ++n)
      out.samples[n] += gain * interference.samples[n];
  }
  return out;
}

Iq32Writer::Iq32Writer(std::filesystem::path path) : path_(std::move(path)), out_(path_, std::ios::binary) {
  if (!out_)
    throw IoFailure("cannot open " + path_.string() + " for writing");
}

Iq32Writer::~Iq32Writer() {
  try {
    close();
  } catch (...) {
  }
}

void Iq32Writer::append(const IqBuffer& buffer) {
  if (!out_.is_open())
    throw IoFailure("iq32 writer already closed");
  if (!started_) {
    sample_rate_ = buffer.sample_rate;
    t0_ = buffer.t0;
    started_ = true;
  } else if (buffer.sample_rate != sample_rate_) {
    throw BufferMismatch("iq32 dump chunks must share one sample rate");
  }
  for (const auto& s : buffer.samples) {
    put_u32_le(out_, std::bit_cast<std::uint32_t>(static_cast<float>(s.real())));
    put_u32_le(out_, std::bit_cast<std::uint32_t>(static_cast<float>(s.imag())));
  }
  length_ += buffer.size();
  if (!out_)
    throw IoFailure("write failed on " + path_.string());
}

void Iq32Writer::close() {
  if (!out_.is_open())
    return;
  out_.close();
  std::ofstream hdr(header_path(path_));
  hdr.precision(17);
  hdr << "sample_rate " << sample_rate_ << "\n"
      << "t0 " << t0_ << "\n"
      << "length " << length_ << "\n";
  if (!hdr)
    throw IoFailure("cannot write " + header_path(path_).string());
}

void write_iq32(const std::filesystem::path& path, const IqBuffer& buffer) {
  Iq32Writer writer(path);
  writer.append(buffer);
  writer.close();
}

IqBuffer read_iq32(const std::filesystem::path& path) {
  std::ifstream hdr(header_path(path));
  if (!hdr)
    throw IoFailure("missing sidecar header " + header_path(path).string());
  IqBuffer out;
  std::size_t length = 0;
  std::string key;
  while (hdr >> key) {
    if (key == "sample_rate")
      hdr >> out.sample_rate;
    else if (key == "t0")
      hdr >> out.t0;
    else if (key == "length")
      hdr >> length;
    else
      throw IoFailure("unknown key '" + key + "' in " + header_path(path).string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() != length * 8)
    throw IoFailure(path.string() + ": payload size does not match header length");
  out.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    const float re = std::bit_cast<float>(get_u32_le(&raw[8 * n]));
    const float im = std::bit_cast<float>(get_u32_le(&raw[8 * n + 4]));
    out.samples[n] = {re, im};
  }
  return out;
}

} // namespace jamwatch
