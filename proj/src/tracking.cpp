#include "jamwatch/tracking.hpp"

#include "jamwatch/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace jamwatch {

namespace {

double sinc2(double x) {
  if (x == 0.0)
    return 1.0;
  const double s = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
  return s * s;
}

} // namespace

void CnoEstimatorConfig::validate() const {
  if (!(code_period_s > 0.0))
    throw InvalidArgument("code period must be > 0");
  if (coherent_blocks < 2)
    throw InvalidArgument("coherent block count M must be >= 2");
  if (averaging < 1)
    throw InvalidArgument("averaging count K must be >= 1");
}

void ChannelModel::validate() const {
  if (!(nominal_cn0_dbhz >= 20.0 && nominal_cn0_dbhz <= 55.0))
    throw InvalidArgument("nominal C/N0 must lie in [20, 55] dB-Hz");
  if (!(quality_factor > 0.0))
    throw InvalidArgument("quality factor Q must be > 0");
  if (!(chip_rate > 0.0))
    throw InvalidArgument("chip rate must be > 0");
}

double effective_cn0(double nominal_cn0_dbhz, double js_db, const ChannelModel& model) {
  if (js_db == -std::numeric_limits<double>::infinity())
    return nominal_cn0_dbhz;
  const double inv = std::pow(10.0, -nominal_cn0_dbhz / 10.0) +
                     std::pow(10.0, js_db / 10.0) / (model.quality_factor * model.chip_rate);
  return -10.0 * std::log10(inv);
}

double jammer_to_signal_db(double jnr_db, double cn0_dbhz, double noise_bandwidth_hz) {
  return jnr_db + 10.0 * std::log10(noise_bandwidth_hz) - cn0_dbhz;
}

double spectral_quality_factor(double f_lo_hz, double f_hi_hz, double chip_rate, double sample_rate) {
  if (!(f_hi_hz > f_lo_hz) || !(chip_rate > 0.0) || !(sample_rate > 0.0))
    throw InvalidArgument("spectral_quality_factor needs f_hi > f_lo and positive rates");
  const double tc = 1.0 / chip_rate;
  auto code_psd = [&](double f) {
    double acc = 0.0;
    for (int m = -8; m <= 8; ++m)
      acc += tc * sinc2((f + m * sample_rate) * tc);
    return acc;
  };
  // Composite Simpson over the jammer band.
  constexpr int n = 4000;
  const double h = (f_hi_hz - f_lo_hz) / n;
  double acc = code_psd(f_lo_hz) + code_psd(f_hi_hz);
  for (int k = 1; k < n; ++k)
    acc += (k % 2 ? 4.0 : 2.0) * code_psd(f_lo_hz + k * h);
  const double kappa = acc * h / 3.0 / (f_hi_hz - f_lo_hz);
  return 1.0 / (chip_rate * kappa);
}

double prompt_amplitude(double cn0_dbhz, double code_period_s) {
  return std::sqrt(2.0 * code_period_s * std::pow(10.0, cn0_dbhz / 10.0));
}

CorrelatorBlock simulate_prompts(double cn0_dbhz, const CnoEstimatorConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_prompts(cn0_dbhz, cfg, rng);
}

CorrelatorBlock simulate_prompts(double cn0_dbhz, const CnoEstimatorConfig& cfg, std::mt19937_64& rng, double t,
                                 SatId sat) {
  cfg.validate();
  if (std::isnan(cn0_dbhz) || cn0_dbhz == std::numeric_limits<double>::infinity())
    throw InvalidArgument("C/N0 must be finite or -inf");
  const double amplitude = prompt_amplitude(cn0_dbhz, cfg.code_period_s);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution bit(0.5);
  const double d = bit(rng) ? 1.0 : -1.0;

  CorrelatorBlock block;
  block.t = t;
  block.sat = sat;
  const auto m = static_cast<std::size_t>(cfg.coherent_blocks);
  block.ip.resize(m);
  block.qp.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    block.ip[i] = amplitude * d + gauss(rng);
    block.qp[i] = gauss(rng);
  }
  return block;
}

double normalized_power(std::span<const CorrelatorBlock> blocks) {
  if (blocks.empty())
    throw EmptyInput("normalized_power needs at least one block");
  const std::size_t m = blocks.front().size();
  double acc = 0.0;
  for (const auto& b : blocks) {
    if (b.ip.size() != m || b.qp.size() != m)
      throw InvalidArgument("all correlator blocks must share the same M");
    double sum_i = 0.0, sum_q = 0.0, wide = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum_i += b.ip[i];
      sum_q += b.qp[i];
      wide += b.ip[i] * b.ip[i] + b.qp[i] * b.qp[i];
    }
    if (wide == 0.0)
      throw DegenerateBlock("correlator block at t=" + std::to_string(b.t) + " has zero wideband power");
    acc += (sum_i * sum_i + sum_q * sum_q) / wide;
  }
  return acc / static_cast<double>(blocks.size());
}

double estimate_cno(double mu_na, const CnoEstimatorConfig& cfg) {
  cfg.validate();
  const double m = cfg.coherent_blocks;
  if (!(mu_na > 1.0))
    throw EstimatorRangeError(EstimatorRangeError::Reason::BelowNoise, mu_na);
  if (!(mu_na < m))
    throw EstimatorRangeError(EstimatorRangeError::Reason::Saturated, mu_na);
  return 10.0 * std::log10((mu_na - 1.0) / (m - mu_na) / cfg.code_period_s);
}

SpreadingCode SpreadingCode::random(std::size_t n_chips, double chip_rate, std::mt19937_64& rng) {
  SpreadingCode code;
  code.chip_rate = chip_rate;
  code.chips.resize(n_chips);
  std::bernoulli_distribution bit(0.5);
  for (auto& c : code.chips)
    c = bit(rng) ? 1 : -1;
  return code;
}

std::vector<std::int8_t> SpreadingCode::sample(std::size_t n_samples, double sample_rate) const {
  std::vector<std::int8_t> out(n_samples);
  const double chips_per_sample = chip_rate / sample_rate;
  for (std::size_t n = 0; n < n_samples; ++n) {
    // Small epsilon keeps exact chip boundaries from rounding down.
    const auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(n) * chips_per_sample + 1e-9));
    if (idx >= chips.size())
      throw InvalidArgument("spreading code shorter than the requested span");
    out[n] = chips[idx];
  }
  return out;
}

std::vector<std::complex<double>> correlate_prompts(std::span<const std::complex<double>> samples,
                                                    std::span<const std::int8_t> code, std::size_t period_len) {
  if (code.size() < samples.size())
    throw BufferMismatch("code shorter than the samples to correlate");
  if (period_len == 0)
    throw InvalidArgument("code period length must be >= 1 sample");
  std::vector<std::complex<double>> prompts;
  prompts.reserve(samples.size() / period_len);
  for (std::size_t begin = 0; begin + period_len <= samples.size(); begin += period_len) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = begin; n < begin + period_len; ++n) {
      re += samples[n].real() * code[n];
      im += samples[n].imag() * code[n];
    }
    prompts.emplace_back(re, im);
  }
  return prompts;
}

std::vector<CorrelatorBlock> group_prompts(std::span<const std::complex<double>> prompts, int coherent_blocks,
                                           double t0, double code_period_s, SatId sat) {
  if (coherent_blocks < 2)
    throw InvalidArgument("coherent block count M must be >= 2");
  const auto m = static_cast<std::size_t>(coherent_blocks);
  std::vector<CorrelatorBlock> blocks;
  for (std::size_t begin = 0; begin + m <= prompts.size(); begin += m) {
    CorrelatorBlock b;
    b.t = t0 + static_cast<double>(begin) * code_period_s;
    b.sat = sat;
    b.ip.reserve(m);
    b.qp.reserve(m);
    for (std::size_t i = begin; i < begin + m; ++i) {
      b.ip.push_back(prompts[i].real());
      b.qp.push_back(prompts[i].imag());
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

} // namespace jamwatch
