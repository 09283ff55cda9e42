#include "jamwatch/simulate.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace jamwatch {

namespace {

enum class Stream : std::uint32_t { AgcJitter = 1, Prompts = 2, Noise = 3, Code = 4, DataBits = 5 };

/// Independent generator per (stream, epoch, satellite) so results do not
/// depend on evaluation order.
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::size_t epoch, SatId sat = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(epoch >> 32), static_cast<std::uint32_t>(sat)};
  return std::mt19937_64(seq);
}

std::uint64_t seed_of(std::mt19937_64& rng) { return rng(); }

double db(double linear) { return 10.0 * std::log10(linear); }

/// Observables carry what the binary log can represent: float32 AGC and
/// 0.1 dB-Hz C/N0.
double representable_agc(double gain_db) { return static_cast<double>(static_cast<float>(gain_db)); }
double representable_cno(double cn0) { return std::clamp(std::round(cn0 * 10.0), 0.0, 600.0) / 10.0; }

GroundTruth truth_of(const Scenario& s) { return {s.schedule, s.epoch_period_s}; }

double js_db_for(const Scenario& s, std::optional<double> jnr_db, double nominal_cn0) {
  if (!jnr_db)
    return -std::numeric_limits<double>::infinity();
  return jammer_to_signal_db(*jnr_db, nominal_cn0, s.frontend.bandwidth_hz);
}

/// Sum of squared autocorrelation lags of a random chip sequence sampled
/// `chips_per_sample` chips apart (probability two samples share a chip).
double sampled_code_rho(double chips_per_sample) {
  double rho = 1.0;
  for (int k = 1; k * chips_per_sample < 1.0; ++k) {
    const double r = 1.0 - k * chips_per_sample;
    rho += 2.0 * r * r;
  }
  return rho;
}

/// Carrier powers such that every channel's post-correlation C/N0 equals its
/// nominal value once the other satellites' spread signals are counted as
/// noise.
std::vector<double> carrier_powers(const Scenario& s, double n0) {
  const double fs = s.frontend.bandwidth_hz;
  const double cross = sampled_code_rho(s.tracking.chip_rate / fs) / fs;
  const auto& sats = s.tracking.satellites;
  std::vector<double> c(sats.size());
  for (std::size_t i = 0; i < sats.size(); ++i)
    c[i] = std::pow(10.0, sats[i].nominal_cn0_dbhz / 10.0) * n0;
  for (int iter = 0; iter < 50; ++iter) {
    double total = 0.0;
    for (double v : c)
      total += v;
    for (std::size_t i = 0; i < sats.size(); ++i)
      c[i] = std::pow(10.0, sats[i].nominal_cn0_dbhz / 10.0) * (n0 + (total - c[i]) * cross);
  }
  return c;
}

} // namespace

bool ChannelLock::update(double t, double cn0_dbhz) {
  if (!(cn0_dbhz >= threshold_)) {
    locked_ = false;
    trackable_since_.reset();
    return false;
  }
  if (locked_)
    return true;
  if (!trackable_since_)
    trackable_since_ = t;
  if (t - *trackable_since_ >= delay_ - 1e-9) {
    locked_ = true;
    trackable_since_.reset();
  }
  return locked_;
}

double frontend_input_power(const Scenario& s, std::optional<double> jnr_db) {
  const double noise = s.frontend.noise_power();
  const double n0 = noise / s.frontend.bandwidth_hz;
  double total = noise * (1.0 + (jnr_db ? std::pow(10.0, *jnr_db / 10.0) : 0.0));
  for (const auto& sat : s.tracking.satellites)
    total += std::pow(10.0, sat.nominal_cn0_dbhz / 10.0) * n0;
  return total;
}

SimulationResult simulate_observables(const Scenario& s) {
  s.validate();
  const auto agc_cfg = s.frontend.agc_config();
  const ChannelModel base_model{45.0, resolved_quality_factor(s), s.tracking.chip_rate};
  const auto& est = s.tracking.estimator;

  std::vector<ChannelLock> locks;
  for (std::size_t k = 0; k < s.tracking.satellites.size(); ++k)
    locks.emplace_back(s.tracking.tracking_threshold_dbhz, s.tracking.reacquisition_delay_s);

  SimulationResult result{{}, truth_of(s)};
  const std::size_t n_epochs = s.epoch_count();
  result.epochs.reserve(n_epochs);
  std::vector<CorrelatorBlock> blocks;
  for (std::size_t k = 0; k < n_epochs; ++k) {
    ObservableEpoch epoch;
    epoch.t = static_cast<double>(k) * s.epoch_period_s;
    const auto jnr = s.schedule.jnr_at(epoch.t);

    auto jitter_rng = make_rng(s.seed, Stream::AgcJitter, k);
    std::normal_distribution<double> jitter(0.0, 1.0);
    const double gain = agc_steady_state_gain(db(frontend_input_power(s, jnr)), agc_cfg) +
                        s.frontend.jitter_db * jitter(jitter_rng);
    epoch.agc_db = representable_agc(std::clamp(gain, agc_cfg.gain_min_db, agc_cfg.gain_max_db));

    for (std::size_t i = 0; i < s.tracking.satellites.size(); ++i) {
      const auto& sat = s.tracking.satellites[i];
      const double effective = effective_cn0(sat.nominal_cn0_dbhz, js_db_for(s, jnr, sat.nominal_cn0_dbhz), base_model);
      if (!locks[i].update(epoch.t, effective)) {
        epoch.lost.push_back(sat.id);
        continue;
      }
      auto rng = make_rng(s.seed, Stream::Prompts, k, sat.id);
      blocks.clear();
      for (int b = 0; b < est.averaging; ++b)
        blocks.push_back(simulate_prompts(effective, est, rng, epoch.t + b * est.coherent_blocks * est.code_period_s,
                                          sat.id));
      try {
        epoch.cno_dbhz[sat.id] = representable_cno(estimate_cno(normalized_power(blocks), est));
      } catch (const EstimatorRangeError&) {
        epoch.lost.push_back(sat.id);
      }
    }
    result.epochs.push_back(std::move(epoch));
  }
  return result;
}

SimulationResult simulate_iq(const Scenario& s, const IqRunOptions& options) {
  s.validate();
  const double fs = s.frontend.bandwidth_hz;
  const auto& est = s.tracking.estimator;
  const double period_samples = fs * est.code_period_s;
  const auto period_len = static_cast<std::size_t>(std::llround(period_samples));
  if (std::abs(period_samples - static_cast<double>(period_len)) > 1e-6)
    throw InvalidArgument("IQ path needs a whole number of samples per code period");
  const std::size_t epoch_len = sample_count(s.epoch_period_s, fs);
  const std::size_t bit_len = period_len * static_cast<std::size_t>(est.coherent_blocks);
  const auto agc_cfg = s.frontend.agc_config();
  if (agc_cfg.block_len > epoch_len)
    throw InvalidArgument("AGC block longer than one epoch");

  const double noise = s.frontend.noise_power();
  const double n0 = noise / fs;
  AgcState agc_state{agc_steady_state_gain(db(frontend_input_power(s, std::nullopt)), agc_cfg), 0.0};
  const double full_scale = std::pow(10.0, (agc_cfg.target_power_db + s.frontend.adc_backoff_db) / 20.0);

  std::vector<ChannelLock> locks;
  for (std::size_t k = 0; k < s.tracking.satellites.size(); ++k)
    locks.emplace_back(s.tracking.tracking_threshold_dbhz, s.tracking.reacquisition_delay_s);

  std::optional<Iq32Writer> dump;
  if (options.dump_path)
    dump.emplace(*options.dump_path);

  SimulationResult result{{}, truth_of(s)};
  const std::size_t n_epochs = s.epoch_count();
  std::vector<std::vector<std::int8_t>> codes(s.tracking.satellites.size());
  const auto carriers = carrier_powers(s, n0);
  for (std::size_t k = 0; k < n_epochs; ++k) {
    const double t = static_cast<double>(k) * s.epoch_period_s;
    auto noise_rng = make_rng(s.seed, Stream::Noise, k);
    IqBuffer input = gen_noise(fs, s.epoch_period_s, noise, seed_of(noise_rng), t);

    for (std::size_t i = 0; i < s.tracking.satellites.size(); ++i) {
      const auto& sat = s.tracking.satellites[i];
      auto code_rng = make_rng(s.seed, Stream::Code, k, sat.id);
      const auto n_chips = static_cast<std::size_t>(std::ceil(s.epoch_period_s * s.tracking.chip_rate)) + 1;
      codes[i] = SpreadingCode::random(n_chips, s.tracking.chip_rate, code_rng).sample(epoch_len, fs);
      auto bit_rng = make_rng(s.seed, Stream::DataBits, k, sat.id);
      std::bernoulli_distribution bit(0.5);
      const double amplitude = std::sqrt(carriers[i]);
      double d = 1.0;
      for (std::size_t n = 0; n < epoch_len; ++n) {
        if (n % bit_len == 0)
          d = bit(bit_rng) ? 1.0 : -1.0;
        input.samples[n] += amplitude * d * codes[i][n];
      }
    }

    const IqBuffer chirp = gen_chirp(s.chirp, fs, s.epoch_period_s, t);
    const IqBuffer combined = combine(input, chirp, s.schedule, noise);
    if (dump)
      dump->append(combined);

    const auto agc = agc_process(combined, agc_cfg, agc_state);
    const auto adc = quantize(agc.output, s.frontend.adc_bits, full_scale);

    ObservableEpoch epoch;
    epoch.t = t;
    epoch.agc_db = representable_agc(agc.trace.back().gain_db);
    for (std::size_t i = 0; i < s.tracking.satellites.size(); ++i) {
      const auto& sat = s.tracking.satellites[i];
      const auto prompts = correlate_prompts(adc.output.samples, codes[i], period_len);
      auto blocks = group_prompts(prompts, est.coherent_blocks, t, est.code_period_s, sat.id);
      blocks.resize(std::min(blocks.size(), static_cast<std::size_t>(est.averaging)));
      double estimate = -std::numeric_limits<double>::infinity();
      try {
        estimate = estimate_cno(normalized_power(blocks), est);
      } catch (const EstimatorRangeError&) {
      } catch (const DegenerateBlock&) {
      }
      if (locks[i].update(t, estimate))
        epoch.cno_dbhz[sat.id] = representable_cno(estimate);
      else
        epoch.lost.push_back(sat.id);
    }
    result.epochs.push_back(std::move(epoch));
  }
  if (dump)
    dump->close();
  return result;
}

} // namespace jamwatch
