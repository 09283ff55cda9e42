#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

namespace jamwatch {

using Sample = std::complex<double>;

/// Linear chirp interferer, baseband offsets from the L1 centre.
///
/// The phase law repeats every `sweep_period_s` (sawtooth). With
/// `continuous_phase` set, the phase accumulated over completed sweeps is
/// carried into the next one so that the waveform has no phase jumps at the
/// sweep resets.
struct ChirpConfig {
  double power = 1.0;           ///< linear, relative to the unit noise floor
  double start_freq_hz = 0.0;   ///< frequency at the start of each sweep
  double phase_rad = 0.0;
  int direction = +1;           ///< +1 up-sweep, -1 down-sweep
  double sweep_period_s = 1e-3;
  double freq_min_hz = -0.5e6;
  double freq_max_hz = 0.5e6;
  bool continuous_phase = true;

  double bandwidth() const noexcept { return freq_max_hz - freq_min_hz; }
  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

struct IqBuffer {
  double sample_rate = 0.0;
  double t0 = 0.0;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
  double time_at(std::size_t n) const noexcept { return t0 + static_cast<double>(n) / sample_rate; }
  double mean_power() const noexcept;
};

/// Number of samples covering `duration` seconds.
std::size_t sample_count(double duration, double sample_rate);

struct JammingInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  double jnr_db = 0.0;

  bool contains(double t) const noexcept { return t >= start_s && t < end_s; }
  bool operator==(const JammingInterval&) const = default;
};

/// Ordered, non-overlapping jamming intervals.
class JammingSchedule {
public:
  JammingSchedule() = default;
  /// Throws InvalidArgument if the intervals are unsorted, empty-length or overlap.
  explicit JammingSchedule(std::vector<JammingInterval> intervals);

  const std::vector<JammingInterval>& intervals() const noexcept { return intervals_; }
  bool empty() const noexcept { return intervals_.empty(); }
  std::size_t size() const noexcept { return intervals_.size(); }

  /// Index of the interval containing t, if any.
  std::optional<std::size_t> interval_at(double t) const noexcept;
  std::optional<double> jnr_at(double t) const noexcept;

  bool operator==(const JammingSchedule&) const = default;

private:
  std::vector<JammingInterval> intervals_;
};

/// Instantaneous phase in radians of the chirp at absolute time t >= 0.
double chirp_phase(double t, const ChirpConfig& cfg);

/// Instantaneous frequency in Hz: f_I + b*B*tau/T_sweep with tau = t mod T_sweep.
double chirp_frequency(double t, const ChirpConfig& cfg);

/// Smallest sample rate accepted by gen_chirp for this configuration.
double chirp_min_sample_rate(const ChirpConfig& cfg) noexcept;

/// Constant-envelope chirp samples sqrt(P)*exp(j*phase(t0 + n/fs)).
IqBuffer gen_chirp(const ChirpConfig& cfg, double sample_rate, double duration, double t0 = 0.0);

/// Circular complex white Gaussian noise of total variance `noise_power`.
IqBuffer gen_noise(double sample_rate, double duration, double noise_power, std::uint64_t seed,
                   double t0 = 0.0);

JammingSchedule build_schedule(int n_intervals, double interval_len_s, double gap_len_s,
                               double jnr_start_db, double jnr_step_db);

/// Adds `interference` to `signal`, scaled inside each scheduled interval so the
/// measured jammer power equals jnr * reference_noise_power; zero elsewhere.
IqBuffer combine(const IqBuffer& signal, const IqBuffer& interference,
                 const JammingSchedule& schedule, double reference_noise_power = 1.0);

/// Streaming writer for the ".iq32" dump format. The sidecar header is
/// written by close() (or the destructor).
class Iq32Writer {
public:
  explicit Iq32Writer(std::filesystem::path path);
  Iq32Writer(const Iq32Writer&) = delete;
  Iq32Writer& operator=(const Iq32Writer&) = delete;
  ~Iq32Writer();

  void append(const IqBuffer& buffer);
  void close();

private:
  std::filesystem::path path_;
  std::ofstream out_;
  double sample_rate_ = 0.0;
  double t0_ = 0.0;
  std::size_t length_ = 0;
  bool started_ = false;
};

/// Dumps interleaved little-endian float32 I/Q pairs to `path` and writes a
/// `<path>.hdr` sidecar with sample_rate, t0 and length.
void write_iq32(const std::filesystem::path& path, const IqBuffer& buffer);
IqBuffer read_iq32(const std::filesystem::path& path);

} // namespace jamwatch
