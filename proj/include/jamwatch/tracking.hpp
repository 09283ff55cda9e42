#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace jamwatch {

using SatId = int;

/// M prompt correlator outputs of one satellite channel.
struct CorrelatorBlock {
  std::vector<double> ip;
  std::vector<double> qp;
  double t = 0.0;
  SatId sat = 0;

  std::size_t size() const noexcept { return ip.size(); }
};

struct CnoEstimatorConfig {
  double code_period_s = 1e-3; ///< T
  int coherent_blocks = 20;    ///< M
  int averaging = 50;          ///< K

  void validate() const;
  /// Time spanned by one estimate, K*M*T.
  double span_s() const noexcept { return averaging * coherent_blocks * code_period_s; }
};

struct ChannelModel {
  double nominal_cn0_dbhz = 45.0;
  double quality_factor = 1.5; ///< spectral separation factor Q
  double chip_rate = 1.023e6;

  void validate() const;
};

/// C/N0 after jamming: 1 / (1/(C/N0) + (J/S) / (Q * Rc)), in dB-Hz.
double effective_cn0(double nominal_cn0_dbhz, double js_db, const ChannelModel& model);

/// J/S in dB for a jammer `jnr_db` above a noise floor of bandwidth `noise_bandwidth_hz`.
double jammer_to_signal_db(double jnr_db, double cn0_dbhz, double noise_bandwidth_hz);

/// Q for a jammer whose power is spread uniformly over [f_lo, f_hi] against a
/// rectangular-chip spreading code sampled at `sample_rate` (aliases included).
double spectral_quality_factor(double f_lo_hz, double f_hi_hz, double chip_rate, double sample_rate);

/// Coherent prompt amplitude sqrt(2*T*C/N0) for unit-variance I/Q noise.
double prompt_amplitude(double cn0_dbhz, double code_period_s);

/// Statistical prompt model: ip = A*d + n, qp = m, unit-variance noise, one
/// data bit d per block.
CorrelatorBlock simulate_prompts(double cn0_dbhz, const CnoEstimatorConfig& cfg, std::uint64_t seed);
CorrelatorBlock simulate_prompts(double cn0_dbhz, const CnoEstimatorConfig& cfg, std::mt19937_64& rng,
                                 double t = 0.0, SatId sat = 0);

/// Average over blocks of narrowband power / wideband power.
double normalized_power(std::span<const CorrelatorBlock> blocks);

/// Inverts the narrowband/wideband power ratio into C/N0 (dB-Hz).
/// Throws EstimatorRangeError outside (1, M).
double estimate_cno(double mu_na, const CnoEstimatorConfig& cfg);

/// Random +/-1 spreading code; chips are held for fs/Rc samples.
struct SpreadingCode {
  std::vector<std::int8_t> chips;
  double chip_rate = 1.023e6;

  static SpreadingCode random(std::size_t n_chips, double chip_rate, std::mt19937_64& rng);
  /// Per-sample code values for `n_samples` samples at `sample_rate`, starting at chip 0.
  std::vector<std::int8_t> sample(std::size_t n_samples, double sample_rate) const;
};

/// Prompt correlation: one complex sum of samples * code per code period.
std::vector<std::complex<double>> correlate_prompts(std::span<const std::complex<double>> samples,
                                                    std::span<const std::int8_t> code, std::size_t period_len);

/// Groups prompts into consecutive blocks of M.
std::vector<CorrelatorBlock> group_prompts(std::span<const std::complex<double>> prompts, int coherent_blocks,
                                           double t0, double code_period_s, SatId sat);

} // namespace jamwatch
