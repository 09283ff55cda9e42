#include "jamwatch/frontend.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <cmath>

namespace jamwatch {

namespace {

// Floor used when a block carries no energy at all.
constexpr double kSilentBlockDb = -300.0;

} // namespace

void AgcConfig::validate() const {
  if (!(loop_gain > 0.0 && loop_gain <= 1.0))
    throw InvalidArgument("AGC loop gain must lie in (0, 1]");
  if (!(gain_min_db < gain_max_db))
    throw InvalidArgument("AGC gain_min_db must be below gain_max_db");
  if (block_len == 0)
    throw InvalidArgument("AGC block length must be >= 1 sample");
}

std::size_t AgcConfig::block_len_for(double sample_rate, double block_duration_s) {
  const auto n = sample_count(block_duration_s, sample_rate);
  if (n == 0)
    throw InvalidArgument("AGC block duration shorter than one sample");
  return n;
}

double agc_steady_state_gain(double input_power_db, const AgcConfig& cfg) noexcept {
  return std::clamp(cfg.target_power_db - input_power_db, cfg.gain_min_db, cfg.gain_max_db);
}

AgcOutput agc_process(const IqBuffer& input, const AgcConfig& cfg, AgcState& state) {
  cfg.validate();
  if (input.empty())
    throw EmptyInput("AGC input buffer is empty");
  if (cfg.block_len > input.size())
    throw InvalidArgument("AGC block length exceeds the input length");

  AgcOutput result{IqBuffer{input.sample_rate, input.t0, {}}, {}};
  result.output.samples.resize(input.size());
  result.trace.reserve(input.size() / cfg.block_len + 1);

  for (std::size_t begin = 0; begin < input.size(); begin += cfg.block_len) {
    const std::size_t end = std::min(input.size(), begin + cfg.block_len);
    double power = 0.0;
    for (std::size_t n = begin; n < end; ++n)
      power += std::norm(input.samples[n]);
    power /= static_cast<double>(end - begin);
    const double power_db = power > 0.0 ? 10.0 * std::log10(power) : kSilentBlockDb;

    state.gain_db = std::clamp(state.gain_db - cfg.loop_gain * (power_db + state.gain_db - cfg.target_power_db),
                               cfg.gain_min_db, cfg.gain_max_db);
    state.last_update_t = input.time_at(end);

    const double amplitude = std::pow(10.0, state.gain_db / 20.0);
    for (std::size_t n = begin; n < end; ++n)
      result.output.samples[n] = amplitude * input.samples[n];
    result.trace.push_back({state.last_update_t, state.gain_db});
  }
  return result;
}

QuantizeResult quantize(const IqBuffer& input, int bits, double full_scale) {
  if (bits < 2 || bits > 16)
    throw InvalidArgument("quantizer bits must lie in [2, 16]");
  if (!(full_scale > 0.0))
    throw InvalidArgument("quantizer full scale must be > 0");

  const double levels = std::ldexp(1.0, bits);
  const double step = 2.0 * full_scale / levels;
  const double top = full_scale - step / 2.0;
  std::size_t clipped = 0;

  auto q = [&](double x, bool& clip) {
    if (std::abs(x) > full_scale)
      clip = true;
    return std::clamp((std::floor(x / step) + 0.5) * step, -top, top);
  };

  QuantizeResult result{IqBuffer{input.sample_rate, input.t0, {}}, 0.0};
  result.output.samples.resize(input.size());
  for (std::size_t n = 0; n < input.size(); ++n) {
    bool clip = false;
    const double re = q(input.samples[n].real(), clip);
    const double im = q(input.samples[n].imag(), clip);
    result.output.samples[n] = {re, im};
    if (clip)
      ++clipped;
  }
  if (!input.empty())
    result.clip_fraction = static_cast<double>(clipped) / static_cast<double>(input.size());
  return result;
}

} // namespace jamwatch
