#pragma once

#include "jamwatch/waveform.hpp"

#include <cstddef>
#include <vector>

namespace jamwatch {

/// First-order log-domain AGC loop, one gain update per block of samples.
struct AgcConfig {
  double target_power_db = 0.0;  ///< setpoint at the ADC input
  double loop_gain = 0.5;        ///< alpha, in (0, 1]
  std::size_t block_len = 20000; ///< samples per gain update
  double gain_min_db = 0.0;
  double gain_max_db = 60.0;

  void validate() const;
  /// Block length covering `block_duration_s` seconds at `sample_rate`.
  static std::size_t block_len_for(double sample_rate, double block_duration_s);
};

struct AgcState {
  double gain_db = 0.0;
  double last_update_t = 0.0;
};

struct GainPoint {
  double t = 0.0;
  double gain_db = 0.0;
};

struct AgcOutput {
  IqBuffer output;
  std::vector<GainPoint> trace;
};

/// Runs the loop over `input`, updating `state` in place so consecutive
/// buffers can be processed as one stream. A trailing partial block gets its
/// own gain update.
AgcOutput agc_process(const IqBuffer& input, const AgcConfig& cfg, AgcState& state);

/// Fixed point of the loop for a stationary input of `input_power_db`.
double agc_steady_state_gain(double input_power_db, const AgcConfig& cfg) noexcept;

struct QuantizeResult {
  IqBuffer output;
  double clip_fraction = 0.0; ///< fraction of samples with a saturated I or Q
};

/// Uniform mid-rise quantizer applied separately to I and Q, saturating at
/// +/- full_scale.
QuantizeResult quantize(const IqBuffer& input, int bits, double full_scale);

} // namespace jamwatch
